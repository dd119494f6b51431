#include "qaccel/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>

#include "qaccel/errors.hpp"

namespace qaccel {

namespace {

std::string edge_text(const Edge& e) {
  return "(" + std::to_string(e.u) + "," + std::to_string(e.v) + ")";
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void append_double(std::string& out, double value) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  out.append(buf, end);
}

int node_id(const nlohmann::json& value) {
  if (value.is_number_integer()) {
    return value.get<int>();
  }
  // Accept integral floats such as 5.0, reject everything else.
  if (value.is_number_float()) {
    double d = value.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 1e9) {
      return static_cast<int>(d);
    }
  }
  throw GraphError(GraphErrorCode::malformed,
                   "node id must be an integer, got " + value.dump());
}

}  // namespace

IsingGraph make_graph(int node_count, std::vector<Edge> edges,
                      std::vector<double> weights) {
  if (edges.size() != weights.size()) {
    throw GraphError(GraphErrorCode::length_mismatch,
                     "edge list has " + std::to_string(edges.size()) +
                         " entries but weight list has " +
                         std::to_string(weights.size()));
  }
  if (edges.empty()) {
    throw GraphError(GraphErrorCode::empty, "graph has no edges");
  }
  std::set<std::pair<int, int>> seen;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    if (e.u == e.v) {
      throw GraphError(GraphErrorCode::self_loop,
                       "self-loop at edge " + edge_text(e));
    }
    if (e.u < 0 || e.v < 0 || e.u >= node_count || e.v >= node_count) {
      throw GraphError(GraphErrorCode::node_out_of_range,
                       "edge " + edge_text(e) + " outside node range [0, " +
                           std::to_string(node_count) + ")");
    }
    if (!seen.emplace(std::min(e.u, e.v), std::max(e.u, e.v)).second) {
      throw GraphError(GraphErrorCode::duplicate_edge,
                       "duplicate edge " + edge_text(e));
    }
    if (!std::isfinite(weights[i])) {
      throw GraphError(GraphErrorCode::non_finite_weight,
                       "non-finite weight on edge " + edge_text(e));
    }
  }
  IsingGraph g;
  g.node_count_ = node_count;
  g.edges_ = std::move(edges);
  g.weights_ = std::move(weights);
  return g;
}

IsingGraph parse_graph(const nlohmann::json& graph_json,
                       std::optional<int> node_count) {
  if (!graph_json.is_object() || !graph_json.contains("J") ||
      !graph_json.contains("c")) {
    throw GraphError(GraphErrorCode::malformed,
                     "graph must be an object with keys 'J' and 'c'");
  }
  const auto& j = graph_json.at("J");
  const auto& c = graph_json.at("c");
  if (!j.is_array() || !c.is_array()) {
    throw GraphError(GraphErrorCode::malformed, "'J' and 'c' must be arrays");
  }

  std::vector<Edge> edges;
  edges.reserve(j.size());
  int max_id = -1;
  for (const auto& pair : j) {
    if (!pair.is_array() || pair.size() != 2) {
      throw GraphError(GraphErrorCode::malformed,
                       "each 'J' entry must be a pair of node ids, got " +
                           pair.dump());
    }
    Edge e{node_id(pair[0]), node_id(pair[1])};
    max_id = std::max({max_id, e.u, e.v});
    edges.push_back(e);
  }

  std::vector<double> weights;
  weights.reserve(c.size());
  for (const auto& w : c) {
    if (w.is_number()) {
      weights.push_back(w.get<double>());
    } else if (w.is_null()) {
      // nlohmann serializes NaN/inf as null.
      weights.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      throw GraphError(GraphErrorCode::malformed,
                       "weights must be numbers, got " + w.dump());
    }
  }

  int n = node_count.value_or(max_id + 1);
  return make_graph(n, std::move(edges), std::move(weights));
}

nlohmann::json to_json(const IsingGraph& g) {
  nlohmann::json j = nlohmann::json::array();
  for (const Edge& e : g.edges()) {
    j.push_back({e.u, e.v});
  }
  nlohmann::json c(std::vector<double>(g.weights().begin(), g.weights().end()));
  return {{"J", std::move(j)}, {"c", std::move(c)}};
}

double mean_degree(const IsingGraph& g) {
  return 2.0 * static_cast<double>(g.edge_count()) /
         static_cast<double>(g.node_count());
}

CanonicalGraph canonicalize(const IsingGraph& g) {
  const auto edges_in = g.edges();
  const auto weights_in = g.weights();

  std::vector<std::size_t> order(edges_in.size());
  std::iota(order.begin(), order.end(), 0);
  auto normalized = [&](std::size_t i) {
    const Edge& e = edges_in[i];
    return Edge{std::min(e.u, e.v), std::max(e.u, e.v)};
  };
  // Edges are unique, so the sort is total without looking at weights.
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return normalized(a) < normalized(b);
  });

  std::vector<Edge> edges;
  std::vector<double> weights;
  edges.reserve(order.size());
  weights.reserve(order.size());
  std::string text;
  for (std::size_t i : order) {
    Edge e = normalized(i);
    edges.push_back(e);
    weights.push_back(weights_in[i]);
    text += std::to_string(e.u);
    text += '-';
    text += std::to_string(e.v);
    text += ':';
    append_double(text, weights_in[i]);
    text += ';';
  }

  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(fnv1a64(text)));
  CanonicalGraph out;
  out.key = std::string("g") + hex;
  out.graph = make_graph(g.node_count(), std::move(edges), std::move(weights));
  return out;
}

}  // namespace qaccel
