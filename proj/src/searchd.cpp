#include "qaccel/searchd.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <iostream>
#include <thread>

#include "qaccel/corpus.hpp"
#include "qaccel/errors.hpp"

namespace qaccel {

void MutationConfig::validate() const {
  if (!(weight_sigma > 0.0)) throw ConfigError("mutation weight_sigma must be > 0");
  if (!(edge_toggle_probability >= 0.0 && edge_toggle_probability <= 1.0)) {
    throw ConfigError("mutation edge_toggle_probability must lie in [0, 1]");
  }
  if (max_mutations < 0 || children_per_parent < 0 || max_generation < 0) {
    throw ConfigError("mutation counts must be non-negative");
  }
}

nlohmann::json MutationConfig::to_json() const {
  return {{"weight_sigma", weight_sigma},
          {"edge_toggle_probability", edge_toggle_probability},
          {"max_mutations", max_mutations},
          {"children_per_parent", children_per_parent},
          {"max_generation", max_generation}};
}

MutationConfig MutationConfig::from_json(const nlohmann::json& j) {
  MutationConfig c;
  c.weight_sigma = j.value("weight_sigma", c.weight_sigma);
  c.edge_toggle_probability = j.value("edge_toggle_probability", c.edge_toggle_probability);
  c.max_mutations = j.value("max_mutations", c.max_mutations);
  c.children_per_parent = j.value("children_per_parent", c.children_per_parent);
  c.max_generation = j.value("max_generation", c.max_generation);
  c.validate();
  return c;
}

namespace {

struct MutableGraph {
  int n;
  std::vector<Edge> edges;
  std::vector<double> weights;

  bool has(int u, int v) const {
    for (const auto& e : edges) {
      if ((e.u == u && e.v == v) || (e.u == v && e.v == u)) return true;
    }
    return false;
  }
};

bool perturb_weight(MutableGraph& m, const WeightFamily& family, double sigma,
                    std::mt19937_64& rng) {
  if (family.kind == FamilyKind::point_mass) return false;
  std::uniform_int_distribution<std::size_t> pick(0, m.edges.size() - 1);
  std::normal_distribution<double> noise(0.0, sigma);
  const std::size_t i = pick(rng);
  double w = m.weights[i] * (1.0 + noise(rng));
  if (family.kind == FamilyKind::discrete_uniform) {
    w = std::clamp(std::round(w), family.a, family.b);
  } else if (family.kind == FamilyKind::continuous_uniform) {
    w = std::clamp(w, family.a, family.b);
  }
  if (w == m.weights[i] || !std::isfinite(w)) return false;
  m.weights[i] = w;
  return true;
}

bool add_edge(MutableGraph& m, const WeightFamily& family, std::mt19937_64& rng) {
  std::vector<Edge> absent;
  for (int u = 0; u < m.n; ++u) {
    for (int v = u + 1; v < m.n; ++v) {
      if (!m.has(u, v)) absent.push_back({u, v});
    }
  }
  if (absent.empty()) return false;
  std::uniform_int_distribution<std::size_t> pick(0, absent.size() - 1);
  m.edges.push_back(absent[pick(rng)]);
  m.weights.push_back(family.sample(rng));
  return true;
}

bool remove_edge(MutableGraph& m, std::mt19937_64& rng) {
  if (m.edges.size() <= 1) return false;
  std::uniform_int_distribution<std::size_t> pick(0, m.edges.size() - 1);
  const std::size_t i = pick(rng);
  m.edges.erase(m.edges.begin() + static_cast<std::ptrdiff_t>(i));
  m.weights.erase(m.weights.begin() + static_cast<std::ptrdiff_t>(i));
  return true;
}

}  // namespace

IsingGraph mutate(const IsingGraph& g, const MutationConfig& cfg, std::mt19937_64& rng) {
  if (cfg.max_mutations <= 0) return g;
  const WeightFamily family = infer_coordinate(g).family;
  MutableGraph m{g.node_count(), {g.edges().begin(), g.edges().end()},
                 {g.weights().begin(), g.weights().end()}};
  std::uniform_int_distribution<int> count(1, cfg.max_mutations);
  std::bernoulli_distribution toggle(cfg.edge_toggle_probability);
  std::bernoulli_distribution add(0.5);
  const int edits = count(rng);
  for (int e = 0; e < edits; ++e) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      bool done;
      if (toggle(rng)) {
        done = add(rng) ? add_edge(m, family, rng) : remove_edge(m, rng);
      } else {
        done = perturb_weight(m, family, cfg.weight_sigma, rng);
      }
      if (done) break;
    }
  }
  return make_graph(m.n, std::move(m.edges), std::move(m.weights));
}

SearchConfig SearchConfig::defaults() {
  SearchConfig c;
  c.root_schedule.entries = {{Method::simplex, 200, 1.0}, {Method::quasi_newton, 200, 1.0}};
  c.root_schedule.max_rounds = 3;
  c.child_schedule.entries = {{Method::simplex, 40, 0.5}, {Method::quasi_newton, 60, 1.0}};
  c.child_schedule.max_rounds = 2;
  return c;
}

nlohmann::json SearchConfig::to_json() const {
  return {{"root_schedule", root_schedule.to_json()},
          {"child_schedule", child_schedule.to_json()},
          {"mutation", mutation.to_json()},
          {"optimize_factors", optimize_factors},
          {"workers", workers},
          {"evaluation_rate", evaluation_rate},
          {"seed", seed}};
}

SearchConfig SearchConfig::from_json(const nlohmann::json& j) {
  SearchConfig c = defaults();
  if (j.contains("root_schedule")) c.root_schedule = OptSchedule::from_json(j["root_schedule"]);
  if (j.contains("child_schedule")) c.child_schedule = OptSchedule::from_json(j["child_schedule"]);
  if (j.contains("mutation")) c.mutation = MutationConfig::from_json(j["mutation"]);
  c.optimize_factors = j.value("optimize_factors", c.optimize_factors);
  c.workers = j.value("workers", c.workers);
  c.evaluation_rate = j.value("evaluation_rate", c.evaluation_rate);
  c.seed = j.value("seed", c.seed);
  if (c.workers == 0) throw ConfigError("daemon workers must be >= 1");
  return c;
}

nlohmann::json UpsertEvent::to_json() const {
  return {{"task", task_id},        {"store", store},
          {"key", key},             {"depth", depth},
          {"score", score},         {"outcome", std::string(qaccel::to_string(outcome))},
          {"generation", generation}, {"parent", parent_key},
          {"init", init_params}};
}

SearchDaemon::SearchDaemon(Databanks& banks, ScheduleSet schedules, GeneratorConfig generator,
                           SearchConfig config)
    : banks_(banks),
      schedules_(std::move(schedules)),
      generator_(std::move(generator)),
      config_(std::move(config)) {
  config_.root_schedule.validate();
  config_.child_schedule.validate();
  config_.mutation.validate();
}

double SearchDaemon::coverage_priority(const IsingGraph& g, int depth) const {
  const auto coord = infer_coordinate(g);
  double best = kInfiniteDistance;
  for (const auto& rec : banks_.params.snapshot(depth)) {
    best = std::min(best, generator_.distance(coord, rec->coordinate));
  }
  return std::isfinite(best) ? best : kUncoveredPriority;
}

void SearchDaemon::push(SearchTask task) {
  task.id = next_id_++;
  task.priority = coverage_priority(task.graph, task.depth);
  queue_.insert(std::move(task));
}

void SearchDaemon::seed(const std::vector<IsingGraph>& graphs, const std::vector<int>& depths) {
  for (const auto& g : graphs) {
    for (int depth : depths) {
      SearchTask t;
      t.graph = g;
      t.depth = depth;
      push(std::move(t));
    }
  }
}

ChainStepResult SearchDaemon::chain_step(const SearchTask& task) const {
  const QaoaEvaluator evaluator(task.graph);
  ChainStepResult out;
  out.key = canonicalize(task.graph).key;
  const bool inherited = task.init_params.has_value();
  const ParameterVector init =
      inherited ? *task.init_params
                : formula_generate(task.graph, task.depth, schedules_, generator_.model);
  out.optimized = alternating_optimize(evaluator, init,
                                       inherited ? config_.child_schedule : config_.root_schedule);
  out.optimized.params = canonical_gauge(out.optimized.params);
  out.cost = out.optimized.evaluations;

  if (config_.optimize_factors) {
    const int budget = std::max(1, out.optimized.evaluations / 4);
    out.factor = optimize_factor(evaluator, task.graph, schedules_.at(task.depth),
                                 generator_.model.alpha_exponent, budget);
    out.cost += out.factor->evaluations;
  }

  if (task.generation < config_.mutation.max_generation) {
    std::mt19937_64 rng(derive_seed(config_.seed, task.id));
    for (int c = 0; c < config_.mutation.children_per_parent; ++c) {
      SearchTask child;
      child.graph = mutate(task.graph, config_.mutation, rng);
      child.depth = task.depth;
      child.init_params = out.optimized.params;
      child.generation = task.generation + 1;
      child.parent_key = out.key;
      out.children.push_back(std::move(child));
    }
  }
  return out;
}

void SearchDaemon::record(UpsertEvent e) {
  if (sink_) sink_(e);
  log_.push_back(std::move(e));
}

void SearchDaemon::commit(const SearchTask& task, ChainStepResult& result, RunReport& report) {
  const QaoaEvaluator evaluator(task.graph);
  UpsertEvent base;
  base.task_id = task.id;
  base.depth = task.depth;
  base.generation = task.generation;
  base.parent_key = task.parent_key.value_or("");
  if (task.init_params) {
    auto v = task.init_params->values();
    base.init_params.assign(v.begin(), v.end());
  }

  auto rec = make_param_record(task.graph, result.optimized.params, result.optimized.score,
                               Provenance::search_daemon);
  UpsertEvent pe = base;
  pe.store = "params";
  pe.key = rec.key;
  pe.score = rec.score;
  pe.outcome = banks_.params.upsert_if_better(
      std::move(rec), [&](const ParamRecord& r) { return evaluator.score(r.params); });
  if (pe.outcome == UpsertOutcome::created) ++report.params_created;
  if (pe.outcome == UpsertOutcome::replaced) ++report.params_replaced;
  record(std::move(pe));

  if (result.factor) {
    const auto& schedule = schedules_.at(task.depth);
    const int exponent = generator_.model.alpha_exponent;
    auto frec = make_factor_record(task.graph, task.depth, result.factor->factor,
                                   result.factor->score);
    UpsertEvent fe = base;
    fe.store = "factors";
    fe.key = frec.key;
    fe.score = frec.score;
    fe.outcome = banks_.factors.upsert_if_better(std::move(frec), [&](const FactorRecord& r) {
      return evaluator.score(scaled_schedule(r.graph, schedule, r.factor, exponent));
    });
    if (fe.outcome != UpsertOutcome::rejected) ++report.factors_written;
    record(std::move(fe));
  }

  for (auto& child : result.children) push(std::move(child));
}

RunReport SearchDaemon::run(std::size_t max_tasks, const std::atomic<bool>* stop,
                            const std::filesystem::path& stores_dir) {
  RunReport report;
  const auto started = std::chrono::steady_clock::now();
  double spent = 0.0;
  auto stopped = [&] { return stop && stop->load(); };

  std::size_t processed = 0;
  while (processed < max_tasks && !queue_.empty() && !stopped()) {
    const std::size_t batch_size =
        std::min({config_.workers, max_tasks - processed, queue_.size()});
    std::vector<SearchTask> batch;
    for (std::size_t i = 0; i < batch_size; ++i) {
      batch.push_back(*queue_.begin());
      queue_.erase(queue_.begin());
    }

    std::vector<std::optional<ChainStepResult>> results(batch.size());
    std::vector<std::string> errors(batch.size());
    auto work = [&](std::size_t i) {
      try {
        results[i] = chain_step(batch[i]);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    };
    if (batch.size() == 1) {
      work(0);
    } else {
      std::vector<std::thread> threads;
      for (std::size_t i = 0; i < batch.size(); ++i) threads.emplace_back(work, i);
      for (auto& t : threads) t.join();
    }

    for (std::size_t i = 0; i < batch.size(); ++i) {
      ++processed;
      if (!results[i]) {
        ++report.tasks_failed;
        std::cerr << "search: task " << batch[i].id << " failed: " << errors[i] << '\n';
        continue;
      }
      try {
        commit(batch[i], *results[i], report);
        ++report.tasks_completed;
        spent += results[i]->cost;
      } catch (const std::exception& e) {
        ++report.tasks_failed;
        std::cerr << "search: task " << batch[i].id << " commit failed: " << e.what() << '\n';
      }
    }

    if (config_.evaluation_rate > 0.0) {
      const auto due = started + std::chrono::duration<double>(spent / config_.evaluation_rate);
      while (std::chrono::steady_clock::now() < due && !stopped()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
      }
    }
  }
  report.queue_remaining = queue_.size();
  if (!stores_dir.empty()) banks_.save(stores_dir);
  return report;
}

}  // namespace qaccel
