#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace qaccel {

struct Edge {
  int u = 0;
  int v = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Weighted pairwise Ising problem: H_C = sum_e c_e Z_u Z_v.
///
/// Instances are only constructed through make_graph / parse_graph, which
/// enforce the invariants: at least one edge, 0 <= u,v < node_count, u != v,
/// no duplicate unordered pair, finite weights.
class IsingGraph {
public:
  IsingGraph() = default;

  int node_count() const noexcept { return node_count_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  /// Highest interaction order. Only pairwise terms are supported.
  int order() const noexcept { return 2; }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const double> weights() const noexcept { return weights_; }

  friend bool operator==(const IsingGraph&, const IsingGraph&) = default;

private:
  friend IsingGraph make_graph(int, std::vector<Edge>, std::vector<double>);

  int node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<double> weights_;
};

/// Validating constructor. Throws GraphError.
IsingGraph make_graph(int node_count, std::vector<Edge> edges,
                      std::vector<double> weights);

/// Parses the {"J": [[u,v],...], "c": [w,...]} wire format. The node count is
/// max id + 1 unless `node_count` is given, in which case every id must fit.
IsingGraph parse_graph(const nlohmann::json& graph_json,
                       std::optional<int> node_count = std::nullopt);

nlohmann::json to_json(const IsingGraph& g);

/// Mean degree 2|E|/n.
double mean_degree(const IsingGraph& g);

struct CanonicalGraph {
  std::string key;
  IsingGraph graph;
};

/// Stores every edge as u < v, sorts edges lexicographically and permutes the
/// weights in lockstep. Node labels are not relabeled, so the key identifies
/// the literal edge/weight multiset.
CanonicalGraph canonicalize(const IsingGraph& g);

}  // namespace qaccel
