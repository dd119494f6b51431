#include "qaccel/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "qaccel/errors.hpp"

namespace qaccel {

namespace {

constexpr double kRaisedCoefficient = 1.56;

std::ofstream open_csv(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(17);
  return out;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

OptSchedule reference_schedule() {
  OptSchedule s;
  s.entries = {{Method::simplex, 300, 1.0}, {Method::quasi_newton, 300, 1.0}};
  s.max_rounds = 4;
  return s;
}

OptResult optimize_from_formula(const IsingGraph& g, int depth, const ScheduleSet& schedules,
                                const ScalingModel& model, const OptSchedule& schedule) {
  const QaoaEvaluator evaluator(g);
  return alternating_optimize(evaluator, formula_generate(g, depth, schedules, model), schedule);
}

RunReport build_databank(Databanks& banks, const Profile& profile, const ScheduleSet& schedules,
                         const GeneratorConfig& generator, int depth, const BankBuild& build) {
  SearchConfig search = build.search;
  search.seed = build.seed;
  SearchDaemon daemon(banks, schedules, generator, search);
  daemon.seed(seed_graphs(profile, build.seed), {depth});
  RunReport total;
  while (banks.params.snapshot(depth).size() < build.target_records &&
         total.tasks_completed + total.tasks_failed < build.max_tasks &&
         daemon.queue_size() > 0) {
    const std::size_t missing = build.target_records - banks.params.snapshot(depth).size();
    const std::size_t left = build.max_tasks - total.tasks_completed - total.tasks_failed;
    auto r = daemon.run(std::min(missing, left));
    total.tasks_completed += r.tasks_completed;
    total.tasks_failed += r.tasks_failed;
    total.params_created += r.params_created;
    total.params_replaced += r.params_replaced;
    total.factors_written += r.factors_written;
    total.queue_remaining = r.queue_remaining;
  }
  return total;
}

DistanceModel euclidean_over(const ParamStore& store) {
  std::vector<std::vector<double>> coords;
  for (const auto& r : store.snapshot_all()) coords.push_back(r->coordinate.vector());
  if (coords.empty()) return DistanceModel::euclidean(Standardizer::identity(GraphCoordinate::kDimension));
  return DistanceModel::euclidean(Standardizer::fit(coords));
}

HomologousReport homologous_transfer(const ParamStore& store, const std::vector<CorpusGraph>& pool,
                                     int depth, std::size_t count, const DistanceModel& distance,
                                     const ScheduleSet& schedules, const ScalingModel& model) {
  HomologousReport report;
  const auto records = store.snapshot(depth);
  for (const auto& item : pool) {
    if (report.rows.size() == count) break;
    ++report.candidates_scanned;
    const auto canon = canonicalize(item.graph);
    const auto coord = infer_coordinate(canon.graph);
    std::shared_ptr<const ParamRecord> match;
    for (const auto& r : records) {
      if (r->key != canon.key && distance(coord, r->coordinate) == 0.0) {
        match = r;
        break;
      }
    }
    if (!match) continue;
    const QaoaEvaluator evaluator(item.graph);
    HomologousRow row;
    row.key = canon.key;
    row.match_key = match->key;
    row.original = optimize_from_formula(item.graph, depth, schedules, model,
                                         reference_schedule()).score;
    row.transferred = evaluator.score(match->params);
    row.relative_gap = std::abs(row.original - row.transferred) / std::abs(row.original);
    report.rows.push_back(row);
  }
  if (report.rows.size() < count) {
    throw CoverageError("only " + std::to_string(report.rows.size()) +
                        " pool graphs have a homologous record, " + std::to_string(count) +
                        " requested");
  }
  double gaps = 0.0;
  double totals = 0.0;
  for (const auto& r : report.rows) {
    report.mean_relative_gap += r.relative_gap / static_cast<double>(report.rows.size());
    gaps += std::abs(r.original - r.transferred);
    totals += std::abs(r.original);
  }
  report.total_relative_gap = gaps / totals;
  return report;
}

MatchedReport random_vs_matched(const ParamStore& store, const std::vector<CorpusGraph>& corpus,
                                int depth, const DistanceModel& distance,
                                const std::vector<double>& caps, const ScheduleSet& schedules,
                                const ScalingModel& model, std::uint64_t seed) {
  MatchedReport report;
  report.caps = caps;
  report.cap_means.assign(caps.size(), 0.0);
  const auto records = store.snapshot(depth);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& g = corpus[i].graph;
    const auto canon = canonicalize(g);
    const auto coord = infer_coordinate(canon.graph);
    std::vector<std::pair<double, std::shared_ptr<const ParamRecord>>> near;
    for (const auto& r : records) {
      if (r->key == canon.key) continue;
      const double d = distance(coord, r->coordinate);
      if (std::isfinite(d)) near.emplace_back(d, r);
    }
    if (near.empty()) throw CoverageError("no finite-distance record for corpus graph " + canon.key);
    std::sort(near.begin(), near.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first < b.first : a.second->key < b.second->key;
    });
    const QaoaEvaluator evaluator(g);
    const double d_nn = near.front().first;
    report.nn_distance.push_back(d_nn);
    report.original.push_back(
        optimize_from_formula(g, depth, schedules, model, reference_schedule()).score);
    report.matched.push_back(evaluator.score(near.front().second->params));
    std::mt19937_64 rng(derive_seed(seed, i));
    report.random.push_back(evaluator.score(random_parameters(depth, rng)));

    for (std::size_t c = 0; c < caps.size(); ++c) {
      const double limit = std::max(caps[c], d_nn);
      std::size_t eligible = 0;
      while (eligible < near.size() && near[eligible].first <= limit) ++eligible;
      std::mt19937_64 pick_rng(derive_seed(derive_seed(seed, i), c + 1));
      std::uniform_int_distribution<std::size_t> pick(0, eligible - 1);
      report.cap_means[c] += evaluator.score(near[pick(pick_rng)].second->params) /
                             static_cast<double>(corpus.size());
    }
  }
  report.matched_vs_random = mann_whitney(report.matched, report.random);
  return report;
}

FactorReport factor_distribution(const FactorStore& store, const std::vector<CorpusGraph>& corpus,
                                 int depth, const DistanceModel& distance,
                                 const ScheduleSet& schedules, const ScalingModel& model,
                                 int factor_budget) {
  FactorReport report;
  const auto& schedule = schedules.at(depth);
  const auto records = store.snapshot(depth);
  for (const auto& item : corpus) {
    const auto& g = item.graph;
    const auto canon = canonicalize(g);
    const QaoaEvaluator evaluator(g);
    auto score_at = [&](double factor) {
      return evaluator.score(scaled_schedule(g, schedule, factor, model.alpha_exponent));
    };
    FactorRow row;
    row.key = canon.key;
    row.edges = g.edge_count();
    row.degree = mean_degree(g);
    row.baseline = baseline_factor_or_limit(row.degree);
    row.formula = model.coefficient * row.baseline;
    row.knn = std::numeric_limits<double>::quiet_NaN();
    row.knn_score = std::numeric_limits<double>::quiet_NaN();
    try {
      auto found = nearest(infer_coordinate(canon.graph), records, 1, distance, canon.key);
      row.knn = found.front().second->factor;
      row.knn_score = score_at(row.knn);
    } catch (const CoverageError&) {
    }
    auto fit = optimize_factor(evaluator, g, schedule, model.alpha_exponent, factor_budget);
    row.optimized = fit.factor;
    row.optimized_score = fit.score;
    row.baseline_score = score_at(row.baseline);
    row.formula_score = score_at(row.formula);
    report.rows.push_back(row);
  }
  return report;
}

AblationReport ablation(const Databanks& banks, const std::vector<CorpusGraph>& corpus, int depth,
                        const std::vector<AblationScenario>& scenarios,
                        const ScheduleSet& schedules, const GeneratorConfig& generator,
                        std::uint64_t seed) {
  auto params = banks.params.snapshot(depth);
  auto factors = banks.factors.snapshot(depth);
  std::mt19937_64 rng(seed);
  std::shuffle(params.begin(), params.end(), rng);
  std::shuffle(factors.begin(), factors.end(), rng);

  std::vector<QaoaEvaluator> evaluators;
  evaluators.reserve(corpus.size());
  for (const auto& item : corpus) evaluators.emplace_back(item.graph);

  AblationReport report;
  for (const auto& scenario : scenarios) {
    Databanks capped;
    for (std::size_t i = 0; i < std::min(scenario.params_cap, params.size()); ++i) {
      capped.params.upsert_if_better(*params[i]);
    }
    for (std::size_t i = 0; i < std::min(scenario.factors_cap, factors.size()); ++i) {
      capped.factors.upsert_if_better(*factors[i]);
    }
    AblationCurve curve;
    curve.scenario = scenario;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      auto result = generate_best(evaluators[i], corpus[i].graph, depth, capped, schedules,
                                  generator);
      double exact = 0.0, pknn = 0.0, fknn = 0.0, formula = 0.0, top = -kInfiniteDistance;
      for (const auto& c : result.candidates) {
        top = std::max(top, c.score);
        switch (c.algorithm) {
          case Algorithm::exact:
            exact = c.score;
            break;
          case Algorithm::param_knn:
            pknn = c.score;
            break;
          case Algorithm::factor_knn:
            fknn = c.score;
            break;
          case Algorithm::formula:
            formula = c.score;
            curve.formula_params.push_back(c.params);
            break;
        }
      }
      curve.best.push_back(result.best.score);
      curve.best_params.push_back(result.best.params);
      curve.exact.push_back(exact);
      curve.param_knn.push_back(pknn);
      curve.factor_knn.push_back(fknn);
      curve.formula.push_back(formula);
      if (result.best.score == top) ++curve.dominance_holds;
    }
    report.curves.push_back(std::move(curve));
  }
  return report;
}

CoefficientReport coefficient_effect(const std::vector<CorpusGraph>& corpus, int depth,
                                     const ScheduleSet& schedules, const ScalingModel& chosen) {
  CoefficientReport report;
  report.chosen = chosen;
  ScalingModel unit = chosen;
  unit.coefficient = 1.0;
  ScalingModel raised = chosen;
  raised.coefficient = kRaisedCoefficient;
  for (const auto& item : corpus) {
    const QaoaEvaluator evaluator(item.graph);
    report.total_unit += evaluator.score(formula_generate(item.graph, depth, schedules, unit));
    report.total_raised += evaluator.score(formula_generate(item.graph, depth, schedules, raised));
    report.total_chosen += evaluator.score(formula_generate(item.graph, depth, schedules, chosen));
  }
  return report;
}

AsymptoticSchedule derive_schedule(int node_count, int depth, std::uint64_t seed) {
  const int n = node_count % 2 == 0 ? node_count : node_count + 1;
  constexpr int kReferenceDegree = 3;
  std::mt19937_64 rng(seed);
  const IsingGraph reference = random_regular_graph(n, kReferenceDegree, rng);
  const QaoaEvaluator evaluator(reference);

  OptSchedule deep;
  deep.entries = {{Method::simplex, 600, 1.0}, {Method::quasi_newton, 600, 1.0}};
  deep.max_rounds = 6;
  deep.epsilon = 1e-7;

  std::optional<OptResult> best;
  for (double gamma_sign : {1.0, -1.0}) {
    for (double beta_sign : {1.0, -1.0}) {
      for (double scale : {0.4, 0.8}) {
        std::vector<double> gammas(depth), betas(depth);
        for (int l = 0; l < depth; ++l) {
          const double t = (l + 0.5) / depth;
          gammas[l] = gamma_sign * scale * t;
          betas[l] = beta_sign * scale * (1.0 - t);
        }
        auto r = alternating_optimize(evaluator, ParameterVector::from_layers(gammas, betas), deep);
        if (!best || r.score > best->score) best = std::move(r);
      }
    }
  }
  const auto params = canonical_gauge(best->params);
  const double base = baseline_factor(kReferenceDegree);
  AsymptoticSchedule s;
  for (int l = 0; l < depth; ++l) {
    s.gamma_inf.push_back(params.gamma(l) / base);
    s.beta_inf.push_back(params.beta(l));
  }
  return s;
}

CalibrationResult calibrate(const Profile& profile, const std::vector<int>& depths,
                            std::size_t corpus_size, std::uint64_t seed) {
  if (depths.empty()) throw ConfigError("calibration needs at least one depth");
  CalibrationResult result;
  for (int depth : depths) {
    result.schedules.set(derive_schedule(profile.node_count, depth, derive_seed(seed, depth)));
  }
  const auto corpus = generate_corpus(profile, corpus_size, derive_seed(seed, 1000));
  const int depth = depths.front();
  double best_total = -std::numeric_limits<double>::infinity();
  result.totals = nlohmann::json::array();
  std::vector<double> grid;
  for (int step = 0; step <= 75; ++step) grid.push_back(0.5 + 0.02 * step);
  for (int exponent : {-1, 1}) {
    for (double coefficient : grid) {
      const ScalingModel model{coefficient, exponent};
      double total = 0.0;
      for (const auto& item : corpus) {
        total += score(item.graph, formula_generate(item.graph, depth, result.schedules, model));
      }
      result.totals.push_back(
          {{"alpha_exponent", exponent}, {"coefficient", coefficient}, {"total", total}});
      if (total > best_total) {
        best_total = total;
        result.model = model;
      }
    }
  }
  return result;
}

nlohmann::json to_json(const HomologousReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"key", row.key},
                    {"match_key", row.match_key},
                    {"original", row.original},
                    {"transferred", row.transferred},
                    {"relative_gap", row.relative_gap}});
  }
  return {{"rows", rows},
          {"mean_relative_gap", r.mean_relative_gap},
          {"total_relative_gap", r.total_relative_gap},
          {"candidates_scanned", r.candidates_scanned}};
}

nlohmann::json to_json(const MatchedReport& r) {
  return {{"graphs", r.matched.size()},
          {"mean_original", mean(r.original)},
          {"mean_matched", mean(r.matched)},
          {"mean_random", mean(r.random)},
          {"mean_nn_distance", mean(r.nn_distance)},
          {"rank_test",
           {{"u", r.matched_vs_random.u},
            {"z", r.matched_vs_random.z},
            {"p_greater", r.matched_vs_random.p_greater}}},
          {"caps", r.caps},
          {"cap_means", r.cap_means}};
}

nlohmann::json to_json(const AblationReport& r) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : r.curves) {
    out.push_back({{"params_cap", c.scenario.params_cap},
                   {"factors_cap", c.scenario.factors_cap},
                   {"total_best", sum(c.best)},
                   {"total_exact", sum(c.exact)},
                   {"total_param_knn", sum(c.param_knn)},
                   {"total_factor_knn", sum(c.factor_knn)},
                   {"total_formula", sum(c.formula)},
                   {"dominance_holds", c.dominance_holds},
                   {"graphs", c.best.size()}});
  }
  return out;
}

nlohmann::json to_json(const CoefficientReport& r) {
  return {{"total_coefficient_1", r.total_unit},
          {"total_coefficient_1_56", r.total_raised},
          {"total_chosen", r.total_chosen},
          {"chosen", r.chosen.to_json()}};
}

void write_csv(const std::filesystem::path& path, const HomologousReport& r) {
  auto out = open_csv(path);
  out << "key,match_key,original,transferred,relative_gap\n";
  for (const auto& row : r.rows) {
    out << row.key << ',' << row.match_key << ',' << row.original << ',' << row.transferred
        << ',' << row.relative_gap << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const MatchedReport& r) {
  auto out = open_csv(path);
  out << "graph,original,matched,random,nn_distance\n";
  for (std::size_t i = 0; i < r.matched.size(); ++i) {
    out << i << ',' << r.original[i] << ',' << r.matched[i] << ',' << r.random[i] << ','
        << r.nn_distance[i] << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const FactorReport& r) {
  auto out = open_csv(path);
  out << "key,edges,degree,baseline,formula,knn,optimized,baseline_score,formula_score,"
         "knn_score,optimized_score\n";
  for (const auto& row : r.rows) {
    out << row.key << ',' << row.edges << ',' << row.degree << ',' << row.baseline << ','
        << row.formula << ',' << row.knn << ',' << row.optimized << ',' << row.baseline_score
        << ',' << row.formula_score << ',' << row.knn_score << ',' << row.optimized_score
        << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const AblationReport& r) {
  auto out = open_csv(path);
  out << "params_cap,factors_cap,graph,cumulative_best,cumulative_exact,cumulative_param_knn,"
         "cumulative_factor_knn,cumulative_formula\n";
  for (const auto& c : r.curves) {
    double b = 0, e = 0, p = 0, f = 0, fo = 0;
    for (std::size_t i = 0; i < c.best.size(); ++i) {
      b += c.best[i];
      e += c.exact[i];
      p += c.param_knn[i];
      f += c.factor_knn[i];
      fo += c.formula[i];
      out << c.scenario.params_cap << ',' << c.scenario.factors_cap << ',' << i << ',' << b
          << ',' << e << ',' << p << ',' << f << ',' << fo << '\n';
    }
  }
}

}  // namespace qaccel
