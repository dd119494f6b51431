#include "qaccel/metric.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "qaccel/engine.hpp"
#include "qaccel/errors.hpp"

namespace qaccel {

namespace {

void check_dimensions(std::size_t a, std::size_t b) {
  if (a != b) {
    throw MetricError("coordinate dimension mismatch: " + std::to_string(a) + " vs " +
                      std::to_string(b));
  }
}

Eigen::VectorXd difference(std::span<const double> a, std::span<const double> b) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) d[static_cast<Eigen::Index>(i)] = a[i] - b[i];
  return d;
}

}  // namespace

MetricMatrix MetricMatrix::identity(std::size_t dimension) {
  MetricMatrix m;
  m.factor_ = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dimension),
                                        static_cast<Eigen::Index>(dimension));
  return m;
}

MetricMatrix MetricMatrix::from_factor(Eigen::MatrixXd factor) {
  MetricMatrix m;
  m.factor_ = std::move(factor);
  return m;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  check_dimensions(a.size(), b.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc);
}

double mahalanobis_distance(std::span<const double> a, std::span<const double> b,
                            const MetricMatrix& m) {
  check_dimensions(a.size(), b.size());
  check_dimensions(a.size(), m.dimension());
  return (m.factor() * difference(a, b)).norm();
}

double simplified_distance(const GraphCoordinate& a, const GraphCoordinate& b,
                           double bucket_width) {
  if (a.order != b.order || a.node_count != b.node_count ||
      a.family.kind != b.family.kind) {
    return kInfiniteDistance;
  }
  if (std::floor(a.edge_probability / bucket_width) !=
      std::floor(b.edge_probability / bucket_width)) {
    return kInfiniteDistance;
  }
  return std::abs(static_cast<double>(a.edge_count - b.edge_count));
}

Standardizer Standardizer::identity(std::size_t dimension) {
  return {std::vector<double>(dimension, 0.0), std::vector<double>(dimension, 1.0)};
}

Standardizer Standardizer::fit(std::span<const std::vector<double>> vectors) {
  if (vectors.empty()) throw MetricError("cannot standardize an empty coordinate set");
  const std::size_t m = vectors.front().size();
  Standardizer s = identity(m);
  const double n = static_cast<double>(vectors.size());
  for (const auto& v : vectors) {
    check_dimensions(v.size(), m);
    for (std::size_t k = 0; k < m; ++k) s.mean[k] += v[k] / n;
  }
  std::vector<double> var(m, 0.0);
  for (const auto& v : vectors) {
    for (std::size_t k = 0; k < m; ++k) var[k] += (v[k] - s.mean[k]) * (v[k] - s.mean[k]) / n;
  }
  for (std::size_t k = 0; k < m; ++k) s.scale[k] = var[k] > 1e-24 ? std::sqrt(var[k]) : 1.0;
  return s;
}

std::vector<double> Standardizer::apply(std::span<const double> v) const {
  check_dimensions(v.size(), mean.size());
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = (v[k] - mean[k]) / scale[k];
  return out;
}

TrueDistanceSample true_distance(const IsingGraph& gi, const IsingGraph& gj,
                                 const ParameterVector& params_i,
                                 const ParameterVector& params_j) {
  if (params_i.depth() != params_j.depth()) {
    throw MetricError("true distance needs parameters of equal depth");
  }
  const QaoaEvaluator ei(gi);
  const QaoaEvaluator ej(gj);
  TrueDistanceSample s;
  s.coord_i = infer_coordinate(gi).vector();
  s.coord_j = infer_coordinate(gj).vector();
  s.score_i = ei.score(params_i);
  s.score_j = ej.score(params_j);
  s.score_j_with_i = ej.score(params_i);
  s.score_i_with_j = ei.score(params_j);
  s.dist_true = std::abs(s.score_i - s.score_j_with_i) + std::abs(s.score_j - s.score_i_with_j);
  return s;
}

double metric_loss(std::span<const TrueDistanceSample> samples, const MetricMatrix& m) {
  double loss = 0.0;
  for (const auto& s : samples) {
    const double d = mahalanobis_distance(s.coord_i, s.coord_j, m);
    loss += 0.5 * (d - s.dist_true) * (d - s.dist_true);
  }
  return loss;
}

MetricLearnResult learn_metric(std::span<const TrueDistanceSample> samples,
                               const MetricLearnConfig& config) {
  if (samples.empty()) throw MetricError("metric learning needs at least one sample");
  const std::size_t m = samples.front().coord_i.size();
  for (const auto& s : samples) {
    check_dimensions(s.coord_i.size(), m);
    check_dimensions(s.coord_j.size(), m);
  }

  std::vector<TrueDistanceSample> used(samples.begin(), samples.end());
  if (config.pair_budget > 0 && used.size() > config.pair_budget) {
    std::mt19937_64 rng(config.seed);
    std::shuffle(used.begin(), used.end(), rng);
    used.resize(config.pair_budget);
  }
  std::vector<Eigen::VectorXd> deltas;
  deltas.reserve(used.size());
  for (const auto& s : used) deltas.push_back(difference(s.coord_i, s.coord_j));

  const auto loss_of = [&](const Eigen::MatrixXd& factor) {
    double loss = 0.0;
    for (std::size_t p = 0; p < used.size(); ++p) {
      const double d = (factor * deltas[p]).norm();
      loss += 0.5 * (d - used[p].dist_true) * (d - used[p].dist_true);
    }
    return loss;
  };

  MetricLearnResult result;
  result.pairs_used = used.size();
  Eigen::MatrixXd factor = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m),
                                                     static_cast<Eigen::Index>(m));
  double loss = loss_of(factor);
  result.loss_trace.push_back(loss);
  const double inv_n = 1.0 / static_cast<double>(used.size());
  double step = config.step_size;

  for (int it = 0; it < config.steps; ++it) {
    // d/dL 1/2 (||L delta|| - t)^2 = (1 - t/d) L delta delta^T
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(factor.rows(), factor.cols());
    for (std::size_t p = 0; p < used.size(); ++p) {
      const Eigen::VectorXd ld = factor * deltas[p];
      const double d = ld.norm();
      if (d <= 1e-300) continue;
      grad += (1.0 - used[p].dist_true / d) * ld * deltas[p].transpose();
    }
    grad *= inv_n;
    if (grad.norm() < 1e-14) {
      result.loss_trace.push_back(loss);
      continue;
    }
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings) {
      Eigen::MatrixXd candidate = factor - step * grad;
      const double candidate_loss = loss_of(candidate);
      if (candidate_loss <= loss) {
        factor = std::move(candidate);
        loss = candidate_loss;
        accepted = true;
        step *= 1.25;
        break;
      }
      step *= 0.5;
    }
    result.loss_trace.push_back(loss);
    if (!accepted) break;
  }
  result.metric = MetricMatrix::from_factor(std::move(factor));
  return result;
}

namespace {
nlohmann::json matrix_json(const Eigen::MatrixXd& a) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}
}  // namespace

void save_metric(const std::filesystem::path& path, const MetricMatrix& m,
                 const Standardizer& standardizer,
                 std::span<const std::string_view> component_names) {
  nlohmann::json names = nlohmann::json::array();
  for (auto n : component_names) names.push_back(std::string(n));
  nlohmann::json j = {{"dimension", m.dimension()},
                      {"components", names},
                      {"standardization",
                       {{"mean", standardizer.mean}, {"scale", standardizer.scale}}},
                      {"factor", matrix_json(m.factor())},
                      {"matrix", matrix_json(m.matrix())}};
  std::ofstream out(path);
  if (!out) throw MetricError("cannot write metric file " + path.string());
  out << j.dump(2) << '\n';
}

LoadedMetric load_metric(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MetricError("cannot read metric file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw MetricError("malformed metric file " + path.string() + ": " + e.what());
  }
  const auto m = j.at("dimension").get<std::size_t>();
  const auto& rows = j.at("factor");
  if (rows.size() != m) throw MetricError("metric factor does not match its dimension");
  Eigen::MatrixXd factor(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    if (rows[i].size() != m) throw MetricError("metric factor row has wrong length");
    for (std::size_t k = 0; k < m; ++k) {
      factor(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k].get<double>();
    }
  }
  LoadedMetric out;
  out.metric = MetricMatrix::from_factor(std::move(factor));
  out.standardizer.mean = j.at("standardization").at("mean").get<std::vector<double>>();
  out.standardizer.scale = j.at("standardization").at("scale").get<std::vector<double>>();
  if (out.standardizer.mean.size() != m || out.standardizer.scale.size() != m) {
    throw MetricError("metric standardization does not match its dimension");
  }
  return out;
}

std::string_view to_string(MetricMode mode) {
  switch (mode) {
    case MetricMode::simplified:
      return "simplified";
    case MetricMode::euclidean:
      return "euclidean";
    case MetricMode::mahalanobis:
      return "mahalanobis";
  }
  return "unknown";
}

MetricMode parse_metric_mode(std::string_view name) {
  if (name == "simplified") return MetricMode::simplified;
  if (name == "euclidean") return MetricMode::euclidean;
  if (name == "mahalanobis") return MetricMode::mahalanobis;
  throw MetricError("unknown metric mode '" + std::string(name) + "'");
}

DistanceModel DistanceModel::simplified(double bucket_width) {
  DistanceModel d;
  d.mode_ = MetricMode::simplified;
  d.bucket_width_ = bucket_width;
  return d;
}

DistanceModel DistanceModel::euclidean(Standardizer standardizer) {
  DistanceModel d;
  d.mode_ = MetricMode::euclidean;
  d.metric_ = MetricMatrix::identity(standardizer.mean.size());
  d.standardizer_ = std::move(standardizer);
  return d;
}

DistanceModel DistanceModel::mahalanobis(MetricMatrix metric, Standardizer standardizer) {
  check_dimensions(metric.dimension(), standardizer.mean.size());
  DistanceModel d;
  d.mode_ = MetricMode::mahalanobis;
  d.metric_ = std::move(metric);
  d.standardizer_ = std::move(standardizer);
  return d;
}

double DistanceModel::operator()(const GraphCoordinate& a, const GraphCoordinate& b) const {
  if (mode_ == MetricMode::simplified) return simplified_distance(a, b, bucket_width_);
  const auto va = standardizer_.apply(a.vector());
  const auto vb = standardizer_.apply(b.vector());
  if (mode_ == MetricMode::euclidean) return euclidean_distance(va, vb);
  return mahalanobis_distance(va, vb, metric_);
}

}  // namespace qaccel
