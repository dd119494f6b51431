#include "qaccel/generators.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "qaccel/errors.hpp"
#include "qaccel/optim.hpp"

namespace qaccel {

void ScheduleSet::set(AsymptoticSchedule schedule) {
  if (schedule.gamma_inf.empty() || schedule.gamma_inf.size() != schedule.beta_inf.size()) {
    throw GeneratorError("schedule needs equally long, non-empty gamma and beta sequences");
  }
  for (std::size_t i = 0; i < schedule.gamma_inf.size(); ++i) {
    if (!std::isfinite(schedule.gamma_inf[i]) || !std::isfinite(schedule.beta_inf[i])) {
      throw GeneratorError("schedule values must be finite");
    }
  }
  const int depth = schedule.depth();
  by_depth_[depth] = std::move(schedule);
}

const AsymptoticSchedule& ScheduleSet::at(int depth) const {
  auto it = by_depth_.find(depth);
  if (it == by_depth_.end()) {
    throw GeneratorError("no asymptotic schedule for depth " + std::to_string(depth));
  }
  return it->second;
}

std::vector<int> ScheduleSet::depths() const {
  std::vector<int> out;
  for (const auto& [d, s] : by_depth_) out.push_back(d);
  return out;
}

nlohmann::json ScheduleSet::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [d, s] : by_depth_) {
    j[std::to_string(d)] = {{"gamma_inf", s.gamma_inf}, {"beta_inf", s.beta_inf}};
  }
  return j;
}

ScheduleSet ScheduleSet::from_json(const nlohmann::json& j) {
  ScheduleSet set;
  try {
    for (const auto& [depth, entry] : j.items()) {
      AsymptoticSchedule s{entry.at("gamma_inf").get<std::vector<double>>(),
                           entry.at("beta_inf").get<std::vector<double>>()};
      if (std::to_string(s.depth()) != depth) {
        throw GeneratorError("schedule for depth " + depth + " has " +
                             std::to_string(s.depth()) + " layers");
      }
      set.set(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw GeneratorError(std::string("malformed schedule file: ") + e.what());
  }
  return set;
}

ScheduleSet ScheduleSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GeneratorError("cannot read schedule file " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw GeneratorError("malformed schedule file " + path.string() + ": " + e.what());
  }
}

void ScheduleSet::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw GeneratorError("cannot write schedule file " + path.string());
  out << to_json().dump(2) << '\n';
}

nlohmann::json ScalingModel::to_json() const {
  return {{"coefficient", coefficient}, {"alpha_exponent", alpha_exponent}};
}

ScalingModel ScalingModel::from_json(const nlohmann::json& j) {
  ScalingModel m;
  m.coefficient = j.value("coefficient", m.coefficient);
  m.alpha_exponent = j.value("alpha_exponent", m.alpha_exponent);
  if (m.alpha_exponent != 1 && m.alpha_exponent != -1) {
    throw GeneratorError("alpha_exponent must be +1 or -1");
  }
  if (!(m.coefficient > 0.0)) throw GeneratorError("coefficient must be positive");
  return m;
}

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::exact:
      return "exact";
    case Algorithm::param_knn:
      return "param-knn";
    case Algorithm::factor_knn:
      return "factor-knn";
    case Algorithm::formula:
      return "formula";
  }
  return "unknown";
}

std::optional<ParameterVector> exact_match(const CanonicalGraph& g, int depth,
                                           const ParamStore& store) {
  auto rec = store.find(g.key, depth);
  if (!rec) return std::nullopt;
  return rec->params;
}

std::vector<double> inverse_distance_blend(std::span<const double> distances,
                                           std::span<const std::vector<double>> values) {
  if (distances.empty() || distances.size() != values.size()) {
    throw GeneratorError("inverse distance blend needs one distance per value row");
  }
  for (std::size_t i = 0; i < distances.size(); ++i) {
    if (distances[i] == 0.0) return values[i];
  }
  const std::size_t width = values.front().size();
  std::vector<double> acc(width, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    if (values[i].size() != width) throw GeneratorError("value rows differ in length");
    const double w = 1.0 / distances[i];
    total += w;
    for (std::size_t c = 0; c < width; ++c) acc[c] += w * values[i][c];
  }
  for (auto& v : acc) v /= total;
  return acc;
}

ParameterVector knn_parameters(const GraphCoordinate& query, int depth, const ParamStore& store,
                               std::size_t k, const DistanceModel& distance,
                               std::string_view exclude_key) {
  auto found = nearest_records(query, depth, store, k, distance, exclude_key);
  std::vector<double> dists;
  std::vector<std::vector<double>> rows;
  for (const auto& n : found) {
    dists.push_back(n.distance);
    auto v = n.record->params.values();
    rows.emplace_back(v.begin(), v.end());
  }
  return ParameterVector(inverse_distance_blend(dists, rows));
}

double compute_alpha(const IsingGraph& g) {
  if (g.edge_count() == 0) throw GeneratorError("alpha is undefined for an empty edge set");
  double sq = 0.0;
  for (double w : g.weights()) sq += w * w;
  return std::sqrt(sq / static_cast<double>(g.edge_count()));
}

double baseline_factor(double mean_degree) {
  if (!(mean_degree > 1.0)) {
    throw GeneratorError("baseline factor needs mean degree > 1, got " +
                         std::to_string(mean_degree));
  }
  return std::atan(1.0 / std::sqrt(mean_degree - 1.0));
}

double baseline_factor_or_limit(double mean_degree) {
  return mean_degree > 1.0 ? baseline_factor(mean_degree) : std::numbers::pi / 2.0;
}

ParameterVector scaled_schedule(const IsingGraph& g, const AsymptoticSchedule& schedule,
                                double factor, int alpha_exponent) {
  const double alpha = compute_alpha(g);
  const double scale = factor * (alpha_exponent >= 0 ? alpha : 1.0 / alpha);
  std::vector<double> gammas(schedule.gamma_inf.size());
  for (std::size_t l = 0; l < gammas.size(); ++l) gammas[l] = scale * schedule.gamma_inf[l];
  return ParameterVector::from_layers(gammas, schedule.beta_inf);
}

ParameterVector formula_generate(const IsingGraph& g, int depth, const ScheduleSet& schedules,
                                 const ScalingModel& model) {
  const auto& schedule = schedules.at(depth);
  const double factor = model.coefficient * baseline_factor_or_limit(mean_degree(g));
  return scaled_schedule(g, schedule, factor, model.alpha_exponent);
}

ParameterVector factor_generate(const IsingGraph& g, const GraphCoordinate& coord, int depth,
                                const FactorStore& store, std::size_t k,
                                const DistanceModel& distance, const ScheduleSet& schedules,
                                const ScalingModel& model, std::string_view exclude_key) {
  const auto& schedule = schedules.at(depth);
  auto found = nearest(coord, store.snapshot(depth), k, distance, exclude_key);
  std::vector<double> dists;
  std::vector<std::vector<double>> rows;
  for (const auto& [d, rec] : found) {
    dists.push_back(d);
    rows.push_back({rec->factor});
  }
  const double factor = inverse_distance_blend(dists, rows).front();
  return scaled_schedule(g, schedule, factor, model.alpha_exponent);
}

FactorFit optimize_factor(const QaoaEvaluator& evaluator, const IsingGraph& g,
                          const AsymptoticSchedule& schedule, int alpha_exponent, int budget) {
  const double start = baseline_factor_or_limit(mean_degree(g));
  auto objective = [&](std::span<const double> x) {
    return evaluator.score(scaled_schedule(g, schedule, std::exp(x[0]), alpha_exponent));
  };
  auto r = nelder_mead_maximize(objective, {std::log(start)}, 0.2, budget);
  return {std::exp(r.x[0]), r.value, r.evaluations};
}

BestOf generate_best(const IsingGraph& g, int depth, const Databanks& banks,
                     const ScheduleSet& schedules, const GeneratorConfig& config) {
  const QaoaEvaluator evaluator(g);
  return generate_best(evaluator, g, depth, banks, schedules, config);
}

BestOf generate_best(const QaoaEvaluator& evaluator, const IsingGraph& g, int depth,
                     const Databanks& banks, const ScheduleSet& schedules,
                     const GeneratorConfig& config) {
  BestOf out;
  auto add = [&](Algorithm a, ParameterVector p) {
    const double s = evaluator.score(p);
    out.candidates.push_back({a, std::move(p), s});
  };
  const auto canon = canonicalize(g);
  const auto coord = infer_coordinate(canon.graph);

  if (config.use_exact) {
    if (auto p = exact_match(canon, depth, banks.params)) add(Algorithm::exact, std::move(*p));
  }

  // k-NN generators keep their best k.
  auto best_knn = [&](Algorithm a, auto&& make) {
    std::optional<GenerationResult> best;
    for (std::size_t k : config.k_values) {
      try {
        auto p = make(k);
        const double s = evaluator.score(p);
        if (!best || s > best->score) best = GenerationResult{a, std::move(p), s};
      } catch (const CoverageError&) {
      }
    }
    if (best) out.candidates.push_back(std::move(*best));
  };
  best_knn(Algorithm::param_knn, [&](std::size_t k) {
    return knn_parameters(coord, depth, banks.params, k, config.distance, config.exclude_key);
  });
  best_knn(Algorithm::factor_knn, [&](std::size_t k) {
    return factor_generate(canon.graph, coord, depth, banks.factors, k, config.distance,
                           schedules, config.model, config.exclude_key);
  });
  add(Algorithm::formula, formula_generate(g, depth, schedules, config.model));

  out.best = out.candidates.front();
  for (const auto& c : out.candidates) {
    if (c.score > out.best.score) out.best = c;
  }
  return out;
}

}  // namespace qaccel
