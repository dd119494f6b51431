#include "qaccel/coordinate.hpp"

namespace qaccel {

namespace {
constexpr std::array<std::string_view, GraphCoordinate::kDimension> kNames{
    "order",           "node_count",         "edge_count",
    "edge_probability", "family_point_mass",  "family_discrete_uniform",
    "family_continuous_uniform", "family_normal", "weight_mean",
    "weight_stddev"};
}

std::vector<double> GraphCoordinate::vector() const {
  std::vector<double> v(kDimension, 0.0);
  v[0] = order;
  v[1] = node_count;
  v[2] = edge_count;
  v[3] = edge_probability;
  v[4 + static_cast<int>(family.kind)] = 1.0;
  v[8] = family.mean();
  v[9] = family.stddev();
  return v;
}

std::span<const std::string_view> GraphCoordinate::component_names() {
  return kNames;
}

GraphCoordinate infer_coordinate(const IsingGraph& g,
                                 std::span<const FamilyKind> catalog) {
  GraphCoordinate c;
  c.order = g.order();
  c.node_count = g.node_count();
  c.edge_count = static_cast<int>(g.edge_count());
  double n = g.node_count();
  c.edge_probability = static_cast<double>(g.edge_count()) / (n * (n - 1.0) / 2.0);
  c.family = infer_family(g.weights(), catalog).family;
  return c;
}

nlohmann::json to_json(const GraphCoordinate& c) {
  return {{"order", c.order},
          {"node_count", c.node_count},
          {"edge_count", c.edge_count},
          {"edge_probability", c.edge_probability},
          {"family",
           {{"kind", std::string(to_string(c.family.kind))},
            {"a", c.family.a},
            {"b", c.family.b}}}};
}

GraphCoordinate coordinate_from_json(const nlohmann::json& j) {
  GraphCoordinate c;
  c.order = j.at("order").get<int>();
  c.node_count = j.at("node_count").get<int>();
  c.edge_count = j.at("edge_count").get<int>();
  c.edge_probability = j.at("edge_probability").get<double>();
  const auto& f = j.at("family");
  c.family.kind = parse_family_kind(f.at("kind").get<std::string>());
  c.family.a = f.at("a").get<double>();
  c.family.b = f.at("b").get<double>();
  return c;
}

}  // namespace qaccel
