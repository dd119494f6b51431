#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qaccel/databank.hpp"
#include "qaccel/engine.hpp"
#include "qaccel/graph.hpp"
#include "qaccel/metric.hpp"
#include "qaccel/params.hpp"

namespace qaccel {

/// Per-layer asymptotic angles for one depth.
struct AsymptoticSchedule {
  std::vector<double> gamma_inf;
  std::vector<double> beta_inf;

  int depth() const noexcept { return static_cast<int>(gamma_inf.size()); }
  friend bool operator==(const AsymptoticSchedule&, const AsymptoticSchedule&) = default;
};

/// Schedules keyed by depth. File form: {"4": {"gamma_inf": [...],
/// "beta_inf": [...]}, "8": {...}}.
class ScheduleSet {
public:
  void set(AsymptoticSchedule schedule);
  /// Throws GeneratorError when no schedule exists for `depth`.
  const AsymptoticSchedule& at(int depth) const;
  bool contains(int depth) const { return by_depth_.count(depth) != 0; }
  std::vector<int> depths() const;

  nlohmann::json to_json() const;
  static ScheduleSet from_json(const nlohmann::json& j);
  static ScheduleSet load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

private:
  std::map<int, AsymptoticSchedule> by_depth_;
};

struct ScalingModel {
  double coefficient = 1.56;
  /// Power applied to alpha: -1 divides by the weight scale, +1 multiplies.
  int alpha_exponent = -1;

  nlohmann::json to_json() const;
  static ScalingModel from_json(const nlohmann::json& j);
};

enum class Algorithm { exact, param_knn, factor_knn, formula };
std::string_view to_string(Algorithm a);

struct GenerationResult {
  Algorithm algorithm = Algorithm::formula;
  ParameterVector params;
  double score = 0.0;
};

std::optional<ParameterVector> exact_match(const CanonicalGraph& g, int depth,
                                           const ParamStore& store);

/// Inverse-distance weighted mean of the rows of `values`. A zero distance
/// returns that row verbatim (the first one, when several are zero).
std::vector<double> inverse_distance_blend(std::span<const double> distances,
                                           std::span<const std::vector<double>> values);

/// Blends the parameters of the k nearest records. Throws CoverageError.
ParameterVector knn_parameters(const GraphCoordinate& query, int depth, const ParamStore& store,
                               std::size_t k, const DistanceModel& distance,
                               std::string_view exclude_key = {});

/// Root mean square edge weight. Throws GeneratorError on an empty graph.
double compute_alpha(const IsingGraph& g);
/// arctan(1/sqrt(D-1)). Throws GeneratorError for D <= 1.
double baseline_factor(double mean_degree);
/// baseline_factor for D > 1, its D -> 1 limit pi/2 otherwise.
double baseline_factor_or_limit(double mean_degree);

/// gamma_l = factor * gamma_inf_l * alpha^exponent, beta_l = beta_inf_l.
ParameterVector scaled_schedule(const IsingGraph& g, const AsymptoticSchedule& schedule,
                                double factor, int alpha_exponent);

ParameterVector formula_generate(const IsingGraph& g, int depth, const ScheduleSet& schedules,
                                 const ScalingModel& model);

/// Blends the stored factors of the k nearest factor records and scales the
/// schedule with the result. Throws CoverageError.
ParameterVector factor_generate(const IsingGraph& g, const GraphCoordinate& coord, int depth,
                                const FactorStore& store, std::size_t k,
                                const DistanceModel& distance, const ScheduleSet& schedules,
                                const ScalingModel& model, std::string_view exclude_key = {});

struct FactorFit {
  double factor = 0.0;
  double score = 0.0;
  int evaluations = 0;
};

/// 1-D derivative-free search over log(factor), started at the baseline
/// factor, maximizing the score of scaled_schedule.
FactorFit optimize_factor(const QaoaEvaluator& evaluator, const IsingGraph& g,
                          const AsymptoticSchedule& schedule, int alpha_exponent, int budget);

struct GeneratorConfig {
  ScalingModel model;
  DistanceModel distance;
  std::vector<std::size_t> k_values{1, 2};
  /// Records under this key are ignored by the k-NN generators.
  std::string exclude_key;
  bool use_exact = true;
};

struct BestOf {
  GenerationResult best;
  /// Every candidate produced, in the order exact, param-knn, factor-knn,
  /// formula. Ties resolve to the earliest.
  std::vector<GenerationResult> candidates;
};

/// Runs every applicable sub-algorithm, scores each candidate and returns
/// the highest. The formula candidate is always present.
BestOf generate_best(const IsingGraph& g, int depth, const Databanks& banks,
                     const ScheduleSet& schedules, const GeneratorConfig& config);
BestOf generate_best(const QaoaEvaluator& evaluator, const IsingGraph& g, int depth,
                     const Databanks& banks, const ScheduleSet& schedules,
                     const GeneratorConfig& config);

}  // namespace qaccel
