#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qaccel/corpus.hpp"
#include "qaccel/databank.hpp"
#include "qaccel/generators.hpp"
#include "qaccel/optim.hpp"
#include "qaccel/searchd.hpp"
#include "qaccel/stats.hpp"

namespace qaccel {

/// Alternating simplex / quasi-Newton schedule used for "fully optimized"
/// reference scores.
OptSchedule reference_schedule();

/// Optimizes g from the formula parameters with `schedule`.
OptResult optimize_from_formula(const IsingGraph& g, int depth, const ScheduleSet& schedules,
                                const ScalingModel& model, const OptSchedule& schedule);

struct BankBuild {
  std::size_t target_records = 1000;
  std::size_t max_tasks = 2000;
  std::uint64_t seed = 1;
  SearchConfig search = SearchConfig::defaults();
};

/// Runs the search daemon from the profile's seed graphs at one depth until
/// the parameter store holds `target_records` records at that depth or
/// `max_tasks` tasks ran.
RunReport build_databank(Databanks& banks, const Profile& profile, const ScheduleSet& schedules,
                         const GeneratorConfig& generator, int depth, const BankBuild& build);

/// Euclidean distance model standardized over the store's coordinates.
DistanceModel euclidean_over(const ParamStore& store);

// ---------------------------------------------------------------------------

struct HomologousRow {
  std::string key;
  std::string match_key;
  double original = 0.0;     // freshly optimized on the graph itself
  double transferred = 0.0;  // graph scored with the matched record's params
  double relative_gap = 0.0;
};

struct HomologousReport {
  std::vector<HomologousRow> rows;
  double mean_relative_gap = 0.0;
  /// Sum of absolute gaps over sum of absolute original scores.
  double total_relative_gap = 0.0;
  std::size_t candidates_scanned = 0;
};

/// For the first `count` pool graphs that have a distance-0 record other
/// than themselves, compares their optimized score with the score of the
/// matched record's parameters. Throws CoverageError when fewer than
/// `count` graphs have such a match.
HomologousReport homologous_transfer(const ParamStore& store, const std::vector<CorpusGraph>& pool,
                                     int depth, std::size_t count, const DistanceModel& distance,
                                     const ScheduleSet& schedules, const ScalingModel& model);

struct MatchedReport {
  std::vector<double> original;
  std::vector<double> matched;
  std::vector<double> random;
  std::vector<double> nn_distance;
  RankTestResult matched_vs_random;
  /// Distance caps, loosest first, and the mean transferred score when the
  /// source record is drawn uniformly from those within max(cap, d_nn).
  std::vector<double> caps;
  std::vector<double> cap_means;
};

MatchedReport random_vs_matched(const ParamStore& store, const std::vector<CorpusGraph>& corpus,
                                int depth, const DistanceModel& distance,
                                const std::vector<double>& caps, const ScheduleSet& schedules,
                                const ScalingModel& model, std::uint64_t seed);

struct FactorRow {
  std::string key;
  std::size_t edges = 0;
  double degree = 0.0;
  double baseline = 0.0;
  double formula = 0.0;
  double knn = 0.0;  // NaN without coverage
  double optimized = 0.0;
  double baseline_score = 0.0;
  double formula_score = 0.0;
  double knn_score = 0.0;
  double optimized_score = 0.0;
};

struct FactorReport {
  std::vector<FactorRow> rows;
};

FactorReport factor_distribution(const FactorStore& store, const std::vector<CorpusGraph>& corpus,
                                 int depth, const DistanceModel& distance,
                                 const ScheduleSet& schedules, const ScalingModel& model,
                                 int factor_budget);

struct AblationScenario {
  std::size_t params_cap = 0;
  std::size_t factors_cap = 0;
};

struct AblationCurve {
  AblationScenario scenario;
  /// Per corpus graph; a sub-algorithm that produced nothing scores 0.
  std::vector<double> best;
  std::vector<double> exact;
  std::vector<double> param_knn;
  std::vector<double> factor_knn;
  std::vector<double> formula;
  std::vector<ParameterVector> best_params;
  std::vector<ParameterVector> formula_params;
  /// Graphs where best score equals the maximum candidate score.
  std::size_t dominance_holds = 0;
};

struct AblationReport {
  std::vector<AblationCurve> curves;
};

/// Nested random subsets: one shuffle of each store, scenarios keep the
/// first `cap` records.
AblationReport ablation(const Databanks& banks, const std::vector<CorpusGraph>& corpus, int depth,
                        const std::vector<AblationScenario>& scenarios,
                        const ScheduleSet& schedules, const GeneratorConfig& generator,
                        std::uint64_t seed);

struct CoefficientReport {
  double total_unit = 0.0;  // coefficient 1.0
  double total_raised = 0.0;  // coefficient 1.56
  double total_chosen = 0.0;
  ScalingModel chosen;
};

CoefficientReport coefficient_effect(const std::vector<CorpusGraph>& corpus, int depth,
                                     const ScheduleSet& schedules, const ScalingModel& chosen);

struct CalibrationResult {
  ScheduleSet schedules;
  ScalingModel model;
  /// Corpus totals per (alpha_exponent, coefficient) combination.
  nlohmann::json totals;
};

/// Deep-optimizes one random unweighted 3-regular reference graph per
/// depth and expresses its angles relative to the baseline factor.
AsymptoticSchedule derive_schedule(int node_count, int depth, std::uint64_t seed);

/// Derives schedules for `depths`, then picks the alpha exponent and the
/// coefficient (grid 0.50, 0.52, ..., 2.00, which contains 1.0 and 1.56)
/// with the highest formula total on a calibration corpus at the first
/// depth.
CalibrationResult calibrate(const Profile& profile, const std::vector<int>& depths,
                            std::size_t corpus_size, std::uint64_t seed);

// Serialization of reports for the CLI.
nlohmann::json to_json(const HomologousReport& r);
nlohmann::json to_json(const MatchedReport& r);
nlohmann::json to_json(const AblationReport& r);
nlohmann::json to_json(const CoefficientReport& r);
void write_csv(const std::filesystem::path& path, const HomologousReport& r);
void write_csv(const std::filesystem::path& path, const MatchedReport& r);
void write_csv(const std::filesystem::path& path, const FactorReport& r);
void write_csv(const std::filesystem::path& path, const AblationReport& r);

}  // namespace qaccel
