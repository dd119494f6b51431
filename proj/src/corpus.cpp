#include "qaccel/corpus.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "qaccel/errors.hpp"

namespace qaccel {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

std::vector<WeightSource> default_sources() {
  return {{"unit", WeightFamily::point_mass(1.0)},
          {"integer", WeightFamily::discrete_uniform(1.0, 10.0)},
          {"uniform", WeightFamily::continuous_uniform(-1.0, 1.0)},
          {"normal", WeightFamily::normal(0.0, 1.0)}};
}

}  // namespace

Profile Profile::hackathon() {
  Profile p;
  p.sources = default_sources();
  return p;
}

Profile Profile::small() {
  Profile p;
  p.name = "small";
  p.node_count = 8;
  p.depths = {4};
  p.sources = default_sources();
  return p;
}

Profile Profile::by_name(const std::string& name) {
  if (name == "hackathon") return hackathon();
  if (name == "small") return small();
  throw ConfigError("unknown profile '" + name + "'");
}

nlohmann::json Profile::to_json() const {
  nlohmann::json sources_json = nlohmann::json::array();
  for (const auto& s : sources) {
    sources_json.push_back({{"name", s.name},
                            {"family", std::string(qaccel::to_string(s.family.kind))},
                            {"a", s.family.a},
                            {"b", s.family.b}});
  }
  return {{"name", name},
          {"node_count", node_count},
          {"depths", depths},
          {"sources", sources_json},
          {"edge_probability", {edge_probability_min, edge_probability_max}}};
}

Profile Profile::from_json(const nlohmann::json& j) {
  Profile p = j.contains("name") ? by_name(j.at("name").get<std::string>()) : hackathon();
  try {
    p.node_count = j.value("node_count", p.node_count);
    p.depths = j.value("depths", p.depths);
    if (j.contains("sources")) {
      p.sources.clear();
      for (const auto& s : j.at("sources")) {
        p.sources.push_back({s.at("name").get<std::string>(),
                             {parse_family_kind(s.at("family").get<std::string>()),
                              s.at("a").get<double>(), s.at("b").get<double>()}});
      }
    }
    if (j.contains("edge_probability")) {
      p.edge_probability_min = j.at("edge_probability").at(0).get<double>();
      p.edge_probability_max = j.at("edge_probability").at(1).get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed profile: ") + e.what());
  }
  if (p.node_count < 2) throw ConfigError("profile node_count must be >= 2");
  if (p.depths.empty()) throw ConfigError("profile needs at least one depth");
  if (p.sources.empty()) throw ConfigError("profile needs at least one weight source");
  if (!(0.0 < p.edge_probability_min && p.edge_probability_min <= p.edge_probability_max &&
        p.edge_probability_max <= 1.0)) {
    throw ConfigError("profile edge probability range must satisfy 0 < min <= max <= 1");
  }
  return p;
}

IsingGraph random_graph(int node_count, double edge_probability, const WeightFamily& family,
                        std::mt19937_64& rng) {
  std::bernoulli_distribution keep(edge_probability);
  for (;;) {
    std::vector<Edge> edges;
    std::vector<double> weights;
    for (int u = 0; u < node_count; ++u) {
      for (int v = u + 1; v < node_count; ++v) {
        if (keep(rng)) {
          edges.push_back({u, v});
          weights.push_back(family.sample(rng));
        }
      }
    }
    if (!edges.empty()) return make_graph(node_count, std::move(edges), std::move(weights));
  }
}

IsingGraph random_regular_graph(int node_count, int degree, std::mt19937_64& rng) {
  if (degree < 1 || degree >= node_count || (node_count * degree) % 2 != 0) {
    throw std::invalid_argument("no simple regular graph with these parameters");
  }
  for (;;) {
    std::vector<int> stubs;
    for (int v = 0; v < node_count; ++v) {
      for (int k = 0; k < degree; ++k) stubs.push_back(v);
    }
    std::shuffle(stubs.begin(), stubs.end(), rng);
    std::set<std::pair<int, int>> pairs;
    bool ok = true;
    for (std::size_t i = 0; i < stubs.size() && ok; i += 2) {
      const int u = std::min(stubs[i], stubs[i + 1]);
      const int v = std::max(stubs[i], stubs[i + 1]);
      ok = u != v && pairs.emplace(u, v).second;
    }
    if (!ok) continue;
    std::vector<Edge> edges;
    for (const auto& [u, v] : pairs) edges.push_back({u, v});
    std::vector<double> weights(edges.size(), 1.0);
    return make_graph(node_count, std::move(edges), std::move(weights));
  }
}

std::vector<CorpusGraph> generate_corpus(const Profile& profile, std::size_t count,
                                         std::uint64_t seed) {
  std::vector<CorpusGraph> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::mt19937_64 rng(derive_seed(seed, i));
    const auto& source = profile.sources[i % profile.sources.size()];
    std::uniform_real_distribution<double> pdist(profile.edge_probability_min,
                                                 profile.edge_probability_max);
    const double p = pdist(rng);
    out.push_back({random_graph(profile.node_count, p, source.family, rng), source.name, p});
  }
  return out;
}

std::vector<IsingGraph> seed_graphs(const Profile& profile, std::uint64_t seed) {
  std::vector<IsingGraph> out;
  const double span = profile.edge_probability_max - profile.edge_probability_min;
  std::uint64_t stream = 0;
  for (const auto& source : profile.sources) {
    for (int decile = 0; decile < 10; ++decile) {
      std::mt19937_64 rng(derive_seed(seed, stream++));
      const double p = profile.edge_probability_min + (decile + 0.5) * span / 10.0;
      out.push_back(random_graph(profile.node_count, p, source.family, rng));
    }
  }
  return out;
}

}  // namespace qaccel
