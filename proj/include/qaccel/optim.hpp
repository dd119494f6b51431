#pragma once

#include <functional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qaccel/engine.hpp"
#include "qaccel/params.hpp"

namespace qaccel {

enum class Method {
  simplex,       // derivative-free Nelder-Mead
  quasi_newton,  // BFGS on adjoint gradients
};

std::string_view to_string(Method m);
/// Accepts "derivative-free-simplex" and "quasi-newton-gradient". Throws
/// OptimizerError for anything else.
Method parse_method(std::string_view id);

struct ScheduleEntry {
  Method method = Method::simplex;
  int max_evaluations = 200;
  /// Initial simplex size / initial inverse-Hessian scale multiplier.
  double step_scale = 1.0;
};

struct OptSchedule {
  std::vector<ScheduleEntry> entries;
  double epsilon = 1e-4;
  int max_rounds = 6;

  void validate() const;
  int budget_per_round() const;

  static OptSchedule single(Method m, int budget, double step_scale = 1.0);
  nlohmann::json to_json() const;
  static OptSchedule from_json(const nlohmann::json& j);
};

struct TraceEntry {
  Method method = Method::simplex;
  int round = 0;
  double score = 0.0;  // best-so-far after this entry
  int evaluations = 0;
};

struct OptResult {
  ParameterVector params;
  double score = 0.0;
  /// Cost units spent: one per score evaluation, kGradientCost per gradient.
  int evaluations = 0;
  std::vector<TraceEntry> trace;
};

/// gamma ~ U[-pi, pi], beta ~ U[-pi/2, pi/2].
ParameterVector random_parameters(int depth, std::mt19937_64& rng);

/// Runs one method from `init`. The first evaluation is always `init`
/// itself, so the result never scores below it and a budget of 1 returns the
/// init evaluation. The quasi-Newton method needs kGradientCost units per
/// step; with a smaller budget it only scores `init`.
OptResult local_optimize(const QaoaEvaluator& evaluator, const ParameterVector& init,
                         Method method, int budget, double step_scale = 1.0);
OptResult local_optimize(const QaoaEvaluator& evaluator, const ParameterVector& init,
                         std::string_view method_id, int budget,
                         double step_scale = 1.0);

/// Cycles through the schedule, each entry starting from the best parameters
/// found so far, until a whole cycle gains less than epsilon or max_rounds
/// cycles ran.
OptResult alternating_optimize(const QaoaEvaluator& evaluator,
                               const ParameterVector& init,
                               const OptSchedule& schedule);

struct MaximizeResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
};

/// Generic derivative-free Nelder-Mead maximization with a hard evaluation
/// budget. x0 is evaluated first.
MaximizeResult nelder_mead_maximize(
    const std::function<double(std::span<const double>)>& objective,
    std::vector<double> x0, double initial_step, int budget);

}  // namespace qaccel
