#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "qaccel/coordinate.hpp"
#include "qaccel/engine.hpp"
#include "qaccel/errors.hpp"
#include "qaccel/graph.hpp"
#include "qaccel/params.hpp"

using namespace qaccel;
using nlohmann::json;

namespace {

GraphErrorCode parse_error(const json& j) {
  try {
    parse_graph(j);
  } catch (const GraphError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error for " << j.dump();
  return GraphErrorCode::malformed;
}

}  // namespace

TEST(ParseGraph, WireExample) {
  const auto g = parse_graph(json::parse(R"({"J": [[5,9],[1,2],[8,11]], "c": [5,6,7]})"));
  EXPECT_EQ(g.edge_count(), 3u);
  EXPECT_EQ(g.node_count(), 12);
  EXPECT_EQ(g.edges()[0], (Edge{5, 9}));
  EXPECT_EQ(g.weights()[0], 5.0);
}

TEST(ParseGraph, RejectsInvalidInput) {
  EXPECT_EQ(parse_error(json::parse(R"({"J": [], "c": []})")), GraphErrorCode::empty);
  EXPECT_EQ(parse_error(json::parse(R"({"J": [[1,1]], "c": [2]})")), GraphErrorCode::self_loop);
  EXPECT_EQ(parse_error(json::parse(R"({"J": [[0,1]], "c": [2, 3]})")),
            GraphErrorCode::length_mismatch);
  EXPECT_EQ(parse_error(json::parse(R"({"J": [[0,1],[1,0]], "c": [2, 3]})")),
            GraphErrorCode::duplicate_edge);
  EXPECT_EQ(parse_error(json::parse(R"({"J": [[0,1]]})")), GraphErrorCode::malformed);
  EXPECT_EQ(parse_error(json::parse(R"({"J": [[0,-1]], "c": [1]})")),
            GraphErrorCode::node_out_of_range);
  EXPECT_EQ(parse_error(json::parse(R"({"J": [[0,1.5]], "c": [1]})")), GraphErrorCode::malformed);
  EXPECT_EQ(parse_error(json::parse(R"({"J": [[0,1]], "c": ["x"]})")), GraphErrorCode::malformed);
}

TEST(ParseGraph, FixedNodeCountBoundsIds) {
  const auto j = json::parse(R"({"J": [[0,11]], "c": [1]})");
  EXPECT_EQ(parse_graph(j, 12).node_count(), 12);
  EXPECT_THROW(parse_graph(j, 8), GraphError);
  EXPECT_EQ(parse_graph(json::parse(R"({"J": [[0,1]], "c": [1]})"), 12).node_count(), 12);
}

TEST(ParseGraph, SingleNodeImpossible) {
  EXPECT_THROW(make_graph(1, {}, {}), GraphError);
}

TEST(ParseGraph, JsonRoundTrip) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto g = fx::random_weighted_graph(7, 0.5, rng);
    EXPECT_EQ(parse_graph(to_json(g), g.node_count()), g);
  }
}

TEST(Canonicalize, SortsEdgesAndWeights) {
  const auto g = make_graph(10, {{9, 5}, {2, 1}}, {5, 6});
  const auto c = canonicalize(g);
  ASSERT_EQ(c.graph.edge_count(), 2u);
  EXPECT_EQ(c.graph.edges()[0], (Edge{1, 2}));
  EXPECT_EQ(c.graph.edges()[1], (Edge{5, 9}));
  EXPECT_EQ(c.graph.weights()[0], 6.0);
  EXPECT_EQ(c.graph.weights()[1], 5.0);
}

TEST(Canonicalize, Idempotent) {
  const auto c = canonicalize(make_graph(10, {{9, 5}, {2, 1}}, {5, 6}));
  const auto again = canonicalize(c.graph);
  EXPECT_EQ(again.graph, c.graph);
  EXPECT_EQ(again.key, c.key);
}

TEST(Canonicalize, KeyInvariantUnderInputOrder) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = fx::random_weighted_graph(9, 0.4, rng);
    std::vector<Edge> edges(g.edges().begin(), g.edges().end());
    std::vector<double> weights(g.weights().begin(), g.weights().end());
    std::vector<std::size_t> order(edges.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Edge> e2;
    std::vector<double> w2;
    for (auto i : order) {
      e2.push_back(std::bernoulli_distribution(0.5)(rng) ? Edge{edges[i].v, edges[i].u} : edges[i]);
      w2.push_back(weights[i]);
    }
    const auto shuffled = make_graph(g.node_count(), e2, w2);
    EXPECT_EQ(canonicalize(shuffled).key, canonicalize(g).key);
  }
}

TEST(Canonicalize, KeyDistinguishesWeights) {
  const auto a = canonicalize(make_graph(3, {{0, 1}, {1, 2}}, {1, 2}));
  const auto b = canonicalize(make_graph(3, {{0, 1}, {1, 2}}, {2, 1}));
  EXPECT_NE(a.key, b.key);
}

TEST(MeanDegree, TwiceEdgesOverNodes) {
  EXPECT_DOUBLE_EQ(mean_degree(make_graph(4, {{0, 1}, {2, 3}, {1, 2}}, {1, 1, 1})), 1.5);
}

TEST(ParameterVector, ShapeChecks) {
  EXPECT_THROW(ParameterVector(std::vector<double>{}), std::invalid_argument);
  EXPECT_THROW(ParameterVector({1.0, 2.0, 3.0}), std::invalid_argument);
  EXPECT_THROW(ParameterVector({1.0, std::nan("")}), std::invalid_argument);
  const ParameterVector p({0.1, 0.2, 0.3, 0.4});
  EXPECT_EQ(p.depth(), 2);
  EXPECT_EQ(p.gamma(1), 0.3);
  EXPECT_EQ(p.beta(0), 0.2);
  EXPECT_EQ(ParameterVector::zeros(4).size(), 8u);
  EXPECT_EQ(params_from_json(to_json(p)), p);
}

TEST(CanonicalGauge, PreservesScoreAndNormalizes) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const auto g = fx::random_weighted_graph(6, 0.5, rng);
    std::uniform_real_distribution<double> wide(-7.0, 7.0);
    std::vector<double> v(6);
    for (auto& x : v) x = wide(rng);
    const ParameterVector p(v);
    const auto q = canonical_gauge(p);
    EXPECT_NEAR(score(g, p), score(g, q), 1e-10);
    EXPECT_GE(q.gamma(0), 0.0);
    for (int l = 0; l < q.depth(); ++l) {
      EXPECT_GT(q.beta(l), -std::numbers::pi / 2);
      EXPECT_LE(q.beta(l), std::numbers::pi / 2);
    }
    EXPECT_EQ(canonical_gauge(q), q);
  }
}

TEST(Coordinate, EdgeProbabilityIsCountRatio) {
  const auto g = make_graph(12, {{5, 9}, {1, 2}, {8, 11}}, {5, 5, 5});
  const auto c = infer_coordinate(g);
  EXPECT_NEAR(c.edge_probability, 3.0 / 66.0, 1e-12);
  EXPECT_EQ(c.node_count, 12);
  EXPECT_EQ(c.edge_count, 3);
  EXPECT_EQ(c.order, 2);
  EXPECT_EQ(c.family.kind, FamilyKind::point_mass);
}

TEST(Coordinate, VectorLayoutAndJson) {
  const auto g = make_graph(4, {{0, 1}, {1, 2}, {2, 3}}, {1, 2, 3});
  const auto c = infer_coordinate(g);
  const auto v = c.vector();
  ASSERT_EQ(v.size(), GraphCoordinate::kDimension);
  ASSERT_EQ(GraphCoordinate::component_names().size(), GraphCoordinate::kDimension);
  EXPECT_EQ(v[0], 2.0);
  EXPECT_EQ(v[1], 4.0);
  EXPECT_EQ(v[2], 3.0);
  EXPECT_DOUBLE_EQ(v[3], 0.5);
  EXPECT_EQ(v[4] + v[5] + v[6] + v[7], 1.0);
  EXPECT_EQ(v[5], 1.0);  // integers 1..3 -> discrete uniform
  EXPECT_EQ(coordinate_from_json(to_json(c)), c);
}
