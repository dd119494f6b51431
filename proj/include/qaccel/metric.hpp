#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "qaccel/coordinate.hpp"
#include "qaccel/graph.hpp"
#include "qaccel/params.hpp"

namespace qaccel {

inline constexpr double kInfiniteDistance = std::numeric_limits<double>::infinity();

/// Symmetric PSD matrix M = L^T L, stored through its factor L.
class MetricMatrix {
public:
  MetricMatrix() = default;
  static MetricMatrix identity(std::size_t dimension);
  static MetricMatrix from_factor(Eigen::MatrixXd factor);

  std::size_t dimension() const noexcept { return static_cast<std::size_t>(factor_.cols()); }
  const Eigen::MatrixXd& factor() const noexcept { return factor_; }
  Eigen::MatrixXd matrix() const { return factor_.transpose() * factor_; }

private:
  Eigen::MatrixXd factor_;
};

/// Eq. sqrt((a-b)^T (a-b)). Throws MetricError on dimension mismatch.
double euclidean_distance(std::span<const double> a, std::span<const double> b);
/// sqrt((a-b)^T M (a-b)) = ||L (a-b)||. Throws MetricError on dimension mismatch.
double mahalanobis_distance(std::span<const double> a, std::span<const double> b,
                            const MetricMatrix& m);

/// Edge-count distance used by the default runtime mode: |E_i - E_j| when
/// order, weight family kind, node count and edge-probability bucket all
/// agree, +inf otherwise.
double simplified_distance(const GraphCoordinate& a, const GraphCoordinate& b,
                           double bucket_width = 0.05);

/// Per-component z-scoring of coordinate vectors. Components without spread
/// keep scale 1.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer identity(std::size_t dimension);
  static Standardizer fit(std::span<const std::vector<double>> vectors);
  std::vector<double> apply(std::span<const double> v) const;
};

/// One supervision pair for metric learning.
struct TrueDistanceSample {
  std::vector<double> coord_i;
  std::vector<double> coord_j;
  double score_i = 0.0;           // graph i with its own parameters
  double score_j = 0.0;           // graph j with its own parameters
  double score_j_with_i = 0.0;    // graph j with graph i's parameters
  double score_i_with_j = 0.0;    // graph i with graph j's parameters
  double dist_true = 0.0;         // |score_i - score_j_with_i| + |score_j - score_i_with_j|
};

/// Cross-transfer score gap of two graphs with their stored optimal
/// parameters. Throws MetricError when the two depths differ.
TrueDistanceSample true_distance(const IsingGraph& gi, const IsingGraph& gj,
                                 const ParameterVector& params_i,
                                 const ParameterVector& params_j);

struct MetricLearnConfig {
  /// Maximum number of pairs in the objective; larger sample sets are
  /// subsampled once (Monte Carlo approximation of the full pair sum).
  std::size_t pair_budget = 10000;
  int steps = 500;
  double step_size = 0.1;
  std::uint64_t seed = 1;
};

struct MetricLearnResult {
  MetricMatrix metric;
  /// Objective value before the first step and after every step.
  std::vector<double> loss_trace;
  std::size_t pairs_used = 0;
};

/// Fits M = L^T L to minimize sum 1/2 (dist_M - dist_true)^2 by gradient
/// descent on L from the identity. Backtracking keeps the loss trace
/// non-increasing. Throws MetricError on an empty sample set.
MetricLearnResult learn_metric(std::span<const TrueDistanceSample> samples,
                               const MetricLearnConfig& config);

double metric_loss(std::span<const TrueDistanceSample> samples, const MetricMatrix& m);

/// Persisted form: {"dimension", "components", "standardization", "factor",
/// "matrix"}.
void save_metric(const std::filesystem::path& path, const MetricMatrix& m,
                 const Standardizer& standardizer,
                 std::span<const std::string_view> component_names);
struct LoadedMetric {
  MetricMatrix metric;
  Standardizer standardizer;
};
LoadedMetric load_metric(const std::filesystem::path& path);

enum class MetricMode { simplified, euclidean, mahalanobis };
std::string_view to_string(MetricMode mode);
MetricMode parse_metric_mode(std::string_view name);

/// Graph-space distance in the configured mode. The two vector modes work on
/// standardized coordinates.
class DistanceModel {
public:
  DistanceModel() = default;
  static DistanceModel simplified(double bucket_width = 0.05);
  static DistanceModel euclidean(Standardizer standardizer);
  static DistanceModel mahalanobis(MetricMatrix metric, Standardizer standardizer);

  MetricMode mode() const noexcept { return mode_; }
  double operator()(const GraphCoordinate& a, const GraphCoordinate& b) const;

private:
  MetricMode mode_ = MetricMode::simplified;
  double bucket_width_ = 0.05;
  MetricMatrix metric_;
  Standardizer standardizer_;
};

}  // namespace qaccel
