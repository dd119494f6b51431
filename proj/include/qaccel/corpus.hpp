#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "qaccel/graph.hpp"
#include "qaccel/weight_family.hpp"

namespace qaccel {

/// splitmix64 finalizer of (seed, stream); used to derive independent
/// per-item generator seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

struct WeightSource {
  std::string name;
  WeightFamily family;
};

/// Synthetic workload description: graph size, supported depths and the
/// weight distributions and edge densities graphs are drawn from.
struct Profile {
  std::string name = "hackathon";
  int node_count = 12;
  std::vector<int> depths{4, 8};
  std::vector<WeightSource> sources;
  double edge_probability_min = 0.15;
  double edge_probability_max = 0.95;

  /// 12 nodes, depths 4 and 8, unit / integer 1..10 / uniform [-1,1] /
  /// standard normal weights.
  static Profile hackathon();
  /// Same sources on 8 nodes at depth 4, for fast checks.
  static Profile small();
  static Profile by_name(const std::string& name);

  nlohmann::json to_json() const;
  static Profile from_json(const nlohmann::json& j);
};

/// Erdos-Renyi graph with independent edges of probability p and weights
/// drawn from `family`. Redraws until at least one edge exists.
IsingGraph random_graph(int node_count, double edge_probability, const WeightFamily& family,
                        std::mt19937_64& rng);

/// Uniform-ish random d-regular graph with unit weights (pairing model with
/// restarts). Throws std::invalid_argument when n*d is odd or d >= n.
IsingGraph random_regular_graph(int node_count, int degree, std::mt19937_64& rng);

struct CorpusGraph {
  IsingGraph graph;
  std::string source;
  double edge_probability = 0.0;
};

/// `count` graphs cycling through the profile's sources, with edge
/// probabilities uniform in the profile's range. Item i depends only on
/// (seed, i).
std::vector<CorpusGraph> generate_corpus(const Profile& profile, std::size_t count,
                                         std::uint64_t seed);

/// One graph per (source, edge-count decile) of the profile.
std::vector<IsingGraph> seed_graphs(const Profile& profile, std::uint64_t seed);

}  // namespace qaccel
