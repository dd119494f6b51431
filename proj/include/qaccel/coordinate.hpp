#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qaccel/graph.hpp"
#include "qaccel/weight_family.hpp"

namespace qaccel {

/// Location of a graph in attribute space.
///
/// Vector view (dimension 10, fixed order):
///   0 order, 1 node_count, 2 edge_count, 3 edge_probability,
///   4..7 one-hot weight family (point-mass, discrete-uniform,
///        continuous-uniform, normal),
///   8 mean of the fitted weight family, 9 its standard deviation.
struct GraphCoordinate {
  static constexpr std::size_t kDimension = 10;

  int order = 2;
  int node_count = 0;
  int edge_count = 0;
  double edge_probability = 0.0;
  WeightFamily family;

  std::vector<double> vector() const;
  static std::span<const std::string_view> component_names();

  friend bool operator==(const GraphCoordinate&, const GraphCoordinate&) = default;
};

/// Data source identification: counts are read off the graph, the edge
/// probability is the Erdos-Renyi estimate |E| / C(n,2), and the weight family
/// is the maximum-likelihood member of the catalog.
GraphCoordinate infer_coordinate(const IsingGraph& g,
                                 std::span<const FamilyKind> catalog = default_catalog());

nlohmann::json to_json(const GraphCoordinate& c);
GraphCoordinate coordinate_from_json(const nlohmann::json& j);

}  // namespace qaccel
