#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "qaccel/config.hpp"
#include "qaccel/databank.hpp"
#include "qaccel/engine.hpp"
#include "qaccel/errors.hpp"
#include "qaccel/experiment.hpp"
#include "qaccel/generators.hpp"
#include "qaccel/metric.hpp"
#include "qaccel/searchd.hpp"
#include "qaccel/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qaccel;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop.store(true); }

json read_json_arg(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (arg[first] == '{' || arg[first] == '[')) {
    return json::parse(arg);
  }
  std::ifstream in(arg);
  if (!in) throw Error("cannot read " + arg);
  return json::parse(in);
}

struct Globals {
  std::string config_path;
  std::string profile;
  std::string stores_dir;
  std::optional<std::uint64_t> seed;
};

AppConfig load_config(const Globals& g) {
  AppConfig c = g.config_path.empty() ? AppConfig{} : AppConfig::load(g.config_path);
  c.apply_environment();
  if (!g.profile.empty()) c.profile = Profile::by_name(g.profile);
  if (!g.stores_dir.empty()) c.stores_dir = g.stores_dir;
  if (g.seed) {
    c.seed = *g.seed;
    c.daemon.seed = *g.seed;
  }
  return c;
}

ParameterVector params_arg(const std::string& arg) { return params_from_json(read_json_arg(arg)); }

IsingGraph graph_arg(const std::string& arg, const AppConfig& c) {
  return parse_graph(read_json_arg(arg), c.profile.node_count);
}

ServiceOptions service_options(const AppConfig& c, bool persist) {
  ServiceOptions o;
  o.depths = {c.profile.depths.begin(), c.profile.depths.end()};
  o.node_count = c.profile.node_count;
  o.qubit_ceiling = c.service.qubit_ceiling;
  o.timeout_seconds = c.service.timeout_seconds;
  if (persist) o.persist_dir = c.stores_dir;
  o.seed = c.seed;
  return o;
}

int cmd_serve(const AppConfig& c) {
  Databanks banks = Databanks::load(c.stores_dir);
  const auto schedules = c.load_schedules();
  const auto generator = c.generator_config(banks.params);
  ApiService service(banks, schedules, generator, service_options(c, true));
  HttpServer server(service, c.service);
  const int port = server.bind(c.service.host, c.service.port);
  std::cout << "listening on " << c.service.host << ':' << port << std::endl;

  std::thread daemon_thread;
  std::optional<SearchDaemon> daemon;
  if (c.service.daemon) {
    daemon.emplace(banks, schedules, generator, c.daemon);
    daemon->seed(seed_graphs(c.profile, c.seed), c.profile.depths);
    daemon_thread = std::thread([&] {
      while (!g_stop.load() && daemon->queue_size() > 0) daemon->run(1, &g_stop);
    });
  }
  std::thread watcher([&] {
    while (!g_stop.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
  });
  server.listen();
  g_stop.store(true);
  watcher.join();
  if (daemon_thread.joinable()) daemon_thread.join();
  banks.save(c.stores_dir);
  std::cout << "stopped; stores saved to " << c.stores_dir.string() << std::endl;
  return 0;
}

int cmd_search(const AppConfig& c, std::size_t tasks, const std::vector<int>& depths_arg,
               const std::string& log_path) {
  Databanks banks = Databanks::load(c.stores_dir);
  SearchDaemon daemon(banks, c.load_schedules(), c.generator_config(banks.params), c.daemon);
  const auto depths = depths_arg.empty() ? c.profile.depths : depths_arg;
  daemon.seed(seed_graphs(c.profile, c.seed), depths);
  std::ofstream log;
  if (!log_path.empty()) {
    log.open(log_path);
    if (!log) throw Error("cannot write " + log_path);
    daemon.set_event_sink([&](const UpsertEvent& e) { log << e.to_json().dump() << '\n'; });
  }
  const auto before = banks.stats();
  auto r = daemon.run(tasks, &g_stop, c.stores_dir);
  const auto after = banks.stats();
  json out = {{"tasks_completed", r.tasks_completed}, {"tasks_failed", r.tasks_failed},
              {"params_created", r.params_created},   {"params_replaced", r.params_replaced},
              {"factors_written", r.factors_written}, {"queue_remaining", r.queue_remaining},
              {"S_p", {before.param_records, after.param_records}},
              {"S_o", {before.factor_records, after.factor_records}}};
  std::cout << out.dump(2) << std::endl;
  return 0;
}

int cmd_generate(const AppConfig& c, const std::string& graph, int depth) {
  Databanks banks = Databanks::load(c.stores_dir);
  const auto g = graph_arg(graph, c);
  auto best = generate_best(g, depth, banks, c.load_schedules(), c.generator_config(banks.params));
  json candidates = json::array();
  for (const auto& cand : best.candidates) {
    candidates.push_back({{"algorithm", std::string(to_string(cand.algorithm))},
                          {"score", cand.score},
                          {"parameter", to_json(cand.params)}});
  }
  std::cout << json{{"algorithm", std::string(to_string(best.best.algorithm))},
                    {"score", best.best.score},
                    {"parameter", to_json(best.best.params)},
                    {"candidates", candidates}}
                   .dump(2)
            << std::endl;
  return 0;
}

int cmd_score(const AppConfig& c, const std::string& graph, const std::string& params) {
  const auto g = graph_arg(graph, c);
  const auto p = params_arg(params);
  std::cout << json{{"score", score(g, p)}, {"depth", p.depth()}}.dump(2) << std::endl;
  return 0;
}

int cmd_compare(const AppConfig& c, const std::string& graph, const std::string& params,
                int depth) {
  Databanks banks = Databanks::load(c.stores_dir);
  ApiService service(banks, c.load_schedules(), c.generator_config(banks.params),
                     service_options(c, false));
  json req = {{"api_name", "compare_parameter"},
              {"graph_data", read_json_arg(graph)},
              {"user_parameter", read_json_arg(params)},
              {"qc_depth", depth}};
  auto res = service.handle(req);
  std::cout << res.dump(2) << std::endl;
  return res.value("status", "") == "success" ? 0 : 1;
}

json report_json(const MergeReport& r) {
  return {{"created", r.created}, {"replaced", r.replaced}, {"rejected", r.rejected}};
}

double param_score(const ParamRecord& r) { return score(r.graph, r.params); }

std::function<double(const FactorRecord&)> factor_verifier(const ScheduleSet& schedules,
                                                           int exponent) {
  return [&schedules, exponent](const FactorRecord& r) {
    return score(r.graph, scaled_schedule(r.graph, schedules.at(r.depth), r.factor, exponent));
  };
}

std::string file_kind(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  if (!in || !std::getline(in, line)) throw DatabankError("cannot read " + path.string());
  try {
    return json::parse(line).value("kind", "");
  } catch (const json::exception&) {
    throw DatabankError(path.string() + ":1: missing schema header");
  }
}

int cmd_db(const AppConfig& c, const std::string& action, const std::string& path) {
  Databanks banks = Databanks::load(c.stores_dir);
  if (action == "stats") {
    const auto s = banks.stats();
    std::cout << json{{"S_p", s.param_records}, {"S_o", s.factor_records}}.dump(2) << std::endl;
    return 0;
  }
  if (action == "export") {
    if (path.empty()) throw Error("db export needs a destination directory");
    banks.save(path);
    std::cout << "exported to " << path << std::endl;
    return 0;
  }
  const auto schedules = c.load_schedules();
  const auto fverify = factor_verifier(schedules, c.scaling.alpha_exponent);
  if (action == "import") {
    if (path.empty()) throw Error("db import needs a store file");
    json out;
    if (file_kind(path) == ParamRecord::kKind) {
      ParamStore imported;
      for (const auto& r : ParamStore::load(path).snapshot_all()) {
        ParamRecord copy = *r;
        copy.provenance = Provenance::import;
        imported.upsert_if_better(std::move(copy));
      }
      out["params"] = report_json(banks.params.merge(imported, param_score));
    } else {
      out["factors"] = report_json(banks.factors.merge(FactorStore::load(path), fverify));
    }
    banks.save(c.stores_dir);
    std::cout << out.dump(2) << std::endl;
    return 0;
  }
  if (action == "merge") {
    if (path.empty()) throw Error("db merge needs a stores directory");
    const auto other = Databanks::load(path);
    json out = {{"params", report_json(banks.params.merge(other.params, param_score))},
                {"factors", report_json(banks.factors.merge(other.factors, fverify))}};
    banks.save(c.stores_dir);
    std::cout << out.dump(2) << std::endl;
    return 0;
  }
  if (action == "verify") {
    constexpr double kSweepTolerance = 1e-9;
    json failures = json::array();
    std::size_t checked = 0;
    for (const auto& r : banks.params.snapshot_all()) {
      ++checked;
      const double actual = param_score(*r);
      if (!(std::abs(actual - r->score) <= kSweepTolerance)) {
        failures.push_back({{"store", "params"}, {"key", r->key}, {"depth", r->depth},
                            {"stored", r->score}, {"actual", actual}});
      }
    }
    for (const auto& r : banks.factors.snapshot_all()) {
      ++checked;
      const double actual = fverify(*r);
      if (!(std::abs(actual - r->score) <= kSweepTolerance)) {
        failures.push_back({{"store", "factors"}, {"key", r->key}, {"depth", r->depth},
                            {"stored", r->score}, {"actual", actual}});
      }
    }
    std::cout << json{{"checked", checked}, {"failures", failures}}.dump(2) << std::endl;
    if (!failures.empty()) {
      for (const auto& f : failures) {
        std::cerr << "integrity failure: " << f["store"].get<std::string>() << ' '
                  << f["key"].get<std::string>() << " depth " << f["depth"] << '\n';
      }
      return 1;
    }
    return 0;
  }
  throw Error("unknown db action '" + action + "'");
}

struct ExperimentArgs {
  std::string id;
  std::string out = "results";
  std::size_t corpus = 50;
  std::size_t bank_records = 1000;
  std::size_t max_tasks = 2000;
  int depth = 4;
};

void write_json(const fs::path& path, const json& j) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << j.dump(2) << '\n';
}

int cmd_experiment(const AppConfig& c, const ExperimentArgs& a) {
  const auto schedules = c.load_schedules();
  const fs::path out(a.out);
  const auto corpus = generate_corpus(c.profile, a.corpus, derive_seed(c.seed, 7));

  Databanks banks = Databanks::load(c.stores_dir);
  auto generator = c.generator_config(banks.params);
  if (banks.params.snapshot(a.depth).size() < a.bank_records) {
    std::cerr << "building databank to " << a.bank_records << " records at depth " << a.depth
              << "...\n";
    BankBuild build;
    build.target_records = a.bank_records;
    build.max_tasks = a.max_tasks;
    build.seed = c.seed;
    build.search = c.daemon;
    build_databank(banks, c.profile, schedules, generator, a.depth, build);
    banks.save(c.stores_dir);
    generator = c.generator_config(banks.params);
  }

  json summary;
  if (a.id == "homologous-transfer") {
    const auto pool = generate_corpus(c.profile, 20 * a.corpus, derive_seed(c.seed, 11));
    auto r = homologous_transfer(banks.params, pool, a.depth, 8, DistanceModel::simplified(c.bucket_width),
                                 schedules, c.scaling);
    write_csv(out / "homologous_transfer.csv", r);
    summary = to_json(r);
  } else if (a.id == "random-vs-matched") {
    auto r = random_vs_matched(banks.params, corpus, a.depth, euclidean_over(banks.params),
                               {kInfiniteDistance, 2.0, 1.0, 0.0}, schedules, c.scaling, c.seed);
    write_csv(out / "random_vs_matched.csv", r);
    summary = to_json(r);
  } else if (a.id == "factor-distribution") {
    auto r = factor_distribution(banks.factors, corpus, a.depth, generator.distance, schedules,
                                 c.scaling, 60);
    write_csv(out / "factor_distribution.csv", r);
    summary = {{"rows", r.rows.size()},
               {"coefficient_effect",
                to_json(coefficient_effect(corpus, a.depth, schedules, c.scaling))}};
  } else if (a.id == "ablation") {
    std::vector<AblationScenario> scenarios = {{1000, 1000}, {500, 200}, {250, 100},
                                               {125, 50},    {50, 20},   {0, 0}};
    auto r = ablation(banks, corpus, a.depth, scenarios, schedules, generator, c.seed);
    write_csv(out / "ablation.csv", r);
    summary = to_json(r);
  } else {
    throw Error("unknown experiment '" + a.id + "'");
  }
  write_json(out / (a.id + ".json"), summary);
  std::cout << summary.dump(2) << std::endl;
  return 0;
}

int cmd_calibrate(const AppConfig& c, const std::string& out_path, std::size_t corpus,
                  const std::vector<int>& depths_arg) {
  const auto depths = depths_arg.empty() ? c.profile.depths : depths_arg;
  auto r = calibrate(c.profile, depths, corpus, c.seed);
  r.schedules.save(out_path);
  std::cout << json{{"schedules", out_path},
                    {"scaling", r.model.to_json()},
                    {"totals", r.totals}}
                   .dump(2)
            << std::endl;
  return 0;
}

int cmd_learn_metric(const AppConfig& c, const std::string& out_path, std::size_t pairs,
                     int steps, int depth) {
  Databanks banks = Databanks::load(c.stores_dir);
  const auto records = banks.params.snapshot(depth);
  if (records.size() < 2) throw MetricError("metric learning needs at least two records");
  std::vector<std::vector<double>> coords;
  for (const auto& r : records) coords.push_back(r->coordinate.vector());
  const auto standardizer = Standardizer::fit(coords);

  std::mt19937_64 rng(c.seed);
  std::uniform_int_distribution<std::size_t> pick(0, records.size() - 1);
  std::vector<TrueDistanceSample> samples;
  for (std::size_t s = 0; s < pairs; ++s) {
    const auto i = pick(rng);
    auto j = pick(rng);
    if (i == j) j = (j + 1) % records.size();
    auto sample = true_distance(records[i]->graph, records[j]->graph, records[i]->params,
                                records[j]->params);
    sample.coord_i = standardizer.apply(sample.coord_i);
    sample.coord_j = standardizer.apply(sample.coord_j);
    samples.push_back(std::move(sample));
  }
  MetricLearnConfig cfg;
  cfg.pair_budget = pairs;
  cfg.steps = steps;
  cfg.seed = c.seed;
  auto r = learn_metric(samples, cfg);
  save_metric(out_path, r.metric, standardizer, GraphCoordinate::component_names());
  std::cout << json{{"pairs", r.pairs_used},
                    {"initial_loss", r.loss_trace.front()},
                    {"final_loss", r.loss_trace.back()},
                    {"file", out_path}}
                   .dump(2)
            << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QAOA parameter-initialization accelerator"};
  app.require_subcommand(1);
  Globals globals;
  std::uint64_t seed = 0;
  app.add_option("--config", globals.config_path, "Configuration file (JSON)");
  app.add_option("--profile", globals.profile, "Workload profile (hackathon, small)");
  app.add_option("--stores-dir", globals.stores_dir, "Directory holding params/factors stores");
  auto* seed_opt = app.add_option("--seed", seed, "Global random seed");

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  std::string listen;
  serve->add_option("--listen", listen, "host:port");

  auto* search = app.add_subcommand("search", "Run the chained search daemon");
  std::size_t tasks = 100;
  std::vector<int> search_depths;
  std::string log_path;
  search->add_option("--tasks", tasks, "Number of tasks to process");
  search->add_option("--depth", search_depths, "Depths to seed (default: profile depths)");
  search->add_option("--log", log_path, "Write upsert events as JSON lines");

  auto* generate = app.add_subcommand("generate", "Best initial parameters for a graph");
  std::string graph, params;
  int depth = 4;
  generate->add_option("--graph", graph, "Graph JSON or file")->required();
  generate->add_option("--depth", depth, "Circuit depth");

  auto* score_cmd = app.add_subcommand("score", "Score parameters on a graph");
  score_cmd->add_option("--graph", graph, "Graph JSON or file")->required();
  score_cmd->add_option("--params", params, "Parameter list JSON or file")->required();

  auto* compare = app.add_subcommand("compare", "Compare parameters with current and random");
  compare->add_option("--graph", graph, "Graph JSON or file")->required();
  compare->add_option("--params", params, "Parameter list JSON or file")->required();
  compare->add_option("--depth", depth, "Circuit depth");

  auto* db = app.add_subcommand("db", "Databank administration");
  std::string db_action, db_path;
  db->add_option("action", db_action, "import | export | merge | stats | verify")
      ->required()
      ->check(CLI::IsMember({"import", "export", "merge", "stats", "verify"}));
  db->add_option("path", db_path, "Store file (import) or directory (export, merge)");

  auto* experiment = app.add_subcommand("experiment", "Run a desk-scale experiment");
  ExperimentArgs ex;
  experiment->add_option("id", ex.id, "homologous-transfer | random-vs-matched | "
                                      "factor-distribution | ablation")
      ->required()
      ->check(CLI::IsMember(
          {"homologous-transfer", "random-vs-matched", "factor-distribution", "ablation"}));
  experiment->add_option("--out", ex.out, "Output directory");
  experiment->add_option("--corpus", ex.corpus, "Corpus size")->check(CLI::Range(10, 100000));
  experiment->add_option("--bank-records", ex.bank_records, "Databank size to build");
  experiment->add_option("--max-tasks", ex.max_tasks, "Daemon task limit while building");
  experiment->add_option("--depth", ex.depth, "Circuit depth");

  auto* calibrate_cmd = app.add_subcommand("calibrate", "Derive schedules and scaling model");
  std::string calib_out = "data/schedules.json";
  std::size_t calib_corpus = 40;
  std::vector<int> calib_depths;
  calibrate_cmd->add_option("--out", calib_out, "Schedule file to write");
  calibrate_cmd->add_option("--corpus", calib_corpus, "Calibration corpus size");
  calibrate_cmd->add_option("--depth", calib_depths, "Depths (default: profile depths)");

  auto* learn = app.add_subcommand("learn-metric", "Learn a Mahalanobis metric from the databank");
  std::string metric_out = "metric.json";
  std::size_t pairs = 2000;
  int steps = 500;
  learn->add_option("--out", metric_out, "Metric file to write");
  learn->add_option("--pairs", pairs, "Sampled record pairs");
  learn->add_option("--steps", steps, "Gradient steps");
  learn->add_option("--depth", depth, "Depth of the records used");

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) globals.seed = seed;

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  try {
    AppConfig config = load_config(globals);
    if (*serve) {
      if (!listen.empty()) config.set_listen(listen);
      return cmd_serve(config);
    }
    if (*search) return cmd_search(config, tasks, search_depths, log_path);
    if (*generate) return cmd_generate(config, graph, depth);
    if (*score_cmd) return cmd_score(config, graph, params);
    if (*compare) return cmd_compare(config, graph, params, depth);
    if (*db) return cmd_db(config, db_action, db_path);
    if (*experiment) return cmd_experiment(config, ex);
    if (*calibrate_cmd) return cmd_calibrate(config, calib_out, calib_corpus, calib_depths);
    if (*learn) return cmd_learn_metric(config, metric_out, pairs, steps, depth);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
