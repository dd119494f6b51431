#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "qaccel/corpus.hpp"
#include "qaccel/errors.hpp"
#include "qaccel/optim.hpp"
#include "qaccel/stats.hpp"

using namespace qaccel;

namespace {

constexpr double pi = std::numbers::pi;

const ParameterVector kSingleEdgeOptimum({pi / 4, 3 * pi / 8});

}  // namespace

TEST(RandomParameters, ShapeRangeAndDeterminism) {
  std::mt19937_64 a(5), b(5);
  const auto p = random_parameters(4, a);
  EXPECT_EQ(p.size(), 8u);
  EXPECT_EQ(p, random_parameters(4, b));
  for (int l = 0; l < 4; ++l) {
    EXPECT_LE(std::abs(p.gamma(l)), pi);
    EXPECT_LE(std::abs(p.beta(l)), pi / 2);
  }
  EXPECT_THROW(random_parameters(0, a), OptimizerError);
}

TEST(RandomParameters, CorpusMeanScoreNearZero) {
  const auto corpus = generate_corpus(Profile::hackathon(), 50, 2024);
  std::mt19937_64 rng(99);
  std::vector<double> scores;
  for (const auto& item : corpus) {
    const QaoaEvaluator ev(item.graph);
    for (int draw = 0; draw < 20; ++draw) scores.push_back(ev.score(random_parameters(4, rng)));
  }
  const double sigma = stddev(scores);
  ASSERT_GT(sigma, 0.0);
  EXPECT_LE(std::abs(mean(scores)), 0.15 * sigma) << "mean " << mean(scores) << " sigma " << sigma;
}

TEST(LocalOptimize, OptimalInitStaysOptimal) {
  const QaoaEvaluator ev(fx::single_edge());
  for (auto m : {Method::simplex, Method::quasi_newton}) {
    const auto r = local_optimize(ev, kSingleEdgeOptimum, m, 200);
    EXPECT_NEAR(r.score, 1.0, 1e-6);
    EXPECT_NEAR(r.params[0], kSingleEdgeOptimum[0], 1e-3);
    EXPECT_NEAR(r.params[1], kSingleEdgeOptimum[1], 1e-3);
  }
}

TEST(LocalOptimize, SimplexFromZerosFindsGlobalOptimum) {
  const QaoaEvaluator ev(fx::single_edge());
  EXPECT_GE(local_optimize(ev, ParameterVector::zeros(1), Method::simplex, 400).score, 0.999);
}

TEST(LocalOptimize, QuasiNewtonConvergesFromGenericStart) {
  const QaoaEvaluator ev(fx::single_edge());
  EXPECT_GE(local_optimize(ev, ParameterVector({0.3, 0.2}), Method::quasi_newton, 400).score,
            0.999);
}

TEST(LocalOptimize, BudgetOneReturnsInit) {
  std::mt19937_64 rng(1);
  const auto g = fx::random_weighted_graph(6, 0.5, rng);
  const QaoaEvaluator ev(g);
  const auto init = fx::random_angles(2, rng);
  for (auto m : {Method::simplex, Method::quasi_newton}) {
    const auto r = local_optimize(ev, init, m, 1);
    EXPECT_EQ(r.params, init);
    EXPECT_EQ(r.score, ev.score(init));
    EXPECT_EQ(r.evaluations, 1);
  }
}

TEST(LocalOptimize, NeverWorseAndWithinBudget) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = fx::random_weighted_graph(7, 0.5, rng);
    const QaoaEvaluator ev(g);
    const auto init = fx::random_angles(3, rng);
    const int budget = 1 + static_cast<int>(rng() % 150);
    for (auto m : {Method::simplex, Method::quasi_newton}) {
      const auto r = local_optimize(ev, init, m, budget);
      EXPECT_GE(r.score, ev.score(init));
      EXPECT_LE(r.evaluations, budget);
      EXPECT_NEAR(ev.score(r.params), r.score, 1e-12);
    }
  }
}

TEST(LocalOptimize, UnknownMethodRejected) {
  const QaoaEvaluator ev(fx::single_edge());
  EXPECT_THROW(local_optimize(ev, kSingleEdgeOptimum, "gradient-ascent", 10), OptimizerError);
  EXPECT_NO_THROW(local_optimize(ev, kSingleEdgeOptimum, "quasi-newton-gradient", 10));
  EXPECT_THROW(local_optimize(ev, kSingleEdgeOptimum, Method::simplex, 0), OptimizerError);
}

TEST(AlternatingOptimize, SingleMethodOneRoundEqualsLocal) {
  std::mt19937_64 rng(3);
  const auto g = fx::random_weighted_graph(6, 0.5, rng);
  const QaoaEvaluator ev(g);
  const auto init = fx::random_angles(2, rng);
  auto s = OptSchedule::single(Method::simplex, 120);
  s.max_rounds = 1;
  const auto alt = alternating_optimize(ev, init, s);
  const auto loc = local_optimize(ev, init, Method::simplex, 120);
  EXPECT_EQ(alt.score, loc.score);
  EXPECT_EQ(alt.params, loc.params);
}

TEST(AlternatingOptimize, InfiniteEpsilonRunsOneCycle) {
  std::mt19937_64 rng(4);
  const QaoaEvaluator ev(fx::random_weighted_graph(6, 0.5, rng));
  OptSchedule s;
  s.entries = {{Method::simplex, 50, 1.0}, {Method::quasi_newton, 50, 1.0}};
  s.epsilon = std::numeric_limits<double>::infinity();
  s.max_rounds = 5;
  const auto r = alternating_optimize(ev, fx::random_angles(2, rng), s);
  ASSERT_EQ(r.trace.size(), 2u);
  EXPECT_EQ(r.trace[0].round, 1);
  EXPECT_EQ(r.trace[1].round, 1);
}

TEST(AlternatingOptimize, TraceMonotoneInheritingAndReproducible) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const QaoaEvaluator ev(fx::random_weighted_graph(7, 0.5, rng));
    OptSchedule s;
    s.entries = {{Method::simplex, 60, 1.0}, {Method::quasi_newton, 60, 1.0}};
    s.epsilon = 0.0;
    s.max_rounds = 4;
    const auto init = fx::random_angles(3, rng);
    const double init_score = ev.score(init);
    const auto r = alternating_optimize(ev, init, s);
    double prev = init_score;
    for (const auto& t : r.trace) {
      EXPECT_GE(t.score, prev);
      prev = t.score;
    }
    EXPECT_EQ(r.score, r.trace.back().score);
    EXPECT_GE(r.score, init_score);
    EXPECT_NEAR(ev.score(r.params), r.score, 1e-12);
    const auto again = alternating_optimize(ev, init, s);
    EXPECT_EQ(again.params, r.params);
    EXPECT_EQ(again.score, r.score);
    EXPECT_EQ(again.evaluations, r.evaluations);
  }
}

TEST(AlternatingOptimize, BeatsSingleSimplexAtEqualBudget) {
  const auto corpus = generate_corpus(Profile::hackathon(), 20, 77);
  OptSchedule alt;
  alt.entries = {{Method::simplex, 100, 1.0}, {Method::quasi_newton, 100, 1.0}};
  alt.epsilon = 0.0;
  alt.max_rounds = 3;
  std::mt19937_64 rng(8);
  int wins = 0;
  for (const auto& item : corpus) {
    const QaoaEvaluator ev(item.graph);
    const auto init = random_parameters(4, rng);
    const auto a = alternating_optimize(ev, init, alt);
    const auto b = local_optimize(ev, init, Method::simplex, alt.budget_per_round() * alt.max_rounds);
    if (a.score >= b.score - 1e-9) ++wins;
  }
  EXPECT_GE(wins, 14) << wins << " of 20";
}

TEST(OptSchedule, JsonRoundTripAndValidation) {
  OptSchedule s;
  s.entries = {{Method::simplex, 40, 0.5}, {Method::quasi_newton, 60, 1.0}};
  s.epsilon = std::numeric_limits<double>::infinity();
  s.max_rounds = 2;
  const auto j = s.to_json();
  EXPECT_EQ(j["epsilon"], "inf");
  const auto back = OptSchedule::from_json(j);
  ASSERT_EQ(back.entries.size(), 2u);
  EXPECT_EQ(back.entries[0].step_scale, 0.5);
  EXPECT_EQ(back.entries[1].max_evaluations, 60);
  EXPECT_TRUE(std::isinf(back.epsilon));
  EXPECT_EQ(back.max_rounds, 2);
  EXPECT_EQ(s.budget_per_round(), 100);
  EXPECT_THROW(OptSchedule{}.validate(), OptimizerError);
  EXPECT_THROW(OptSchedule::from_json(nlohmann::json::parse(
                   R"({"methods": ["derivative-free-simplex"], "budgets": [0]})")),
               OptimizerError);
}

TEST(NelderMead, MaximizesConcaveQuadratic) {
  const auto r = nelder_mead_maximize(
      [](std::span<const double> x) {
        return -(x[0] - 1.0) * (x[0] - 1.0) - 4.0 * (x[1] + 2.0) * (x[1] + 2.0);
      },
      {0.0, 0.0}, 0.5, 500);
  EXPECT_NEAR(r.x[0], 1.0, 1e-3);
  EXPECT_NEAR(r.x[1], -2.0, 1e-3);
  EXPECT_LE(r.evaluations, 500);
}
