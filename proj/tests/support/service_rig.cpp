#include "service_rig.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <random>
#include <thread>

#include "fixtures.hpp"
#include "qaccel/optim.hpp"

namespace qaccel::fx {

using nlohmann::json;

ServiceOptions ServiceRig::default_options() {
  ServiceOptions o;
  o.node_count = 12;
  return o;
}

GeneratorConfig ServiceRig::default_generator() {
  GeneratorConfig c;
  c.model = ScalingModel{0.8, -1};
  c.distance = DistanceModel::simplified(0.05);
  return c;
}

ServiceRig::ServiceRig(ServiceOptions options)
    : service(banks, project_schedules(), default_generator(), std::move(options)) {}

json api_request(std::string_view api, const json& graph, int depth) {
  return {{"api_name", api}, {"graph_data", graph}, {"qc_depth", depth}};
}

json api_request(std::string_view api, const json& graph, int depth, const ParameterVector& user) {
  auto r = api_request(api, graph, depth);
  r["user_parameter"] = to_json(user);
  return r;
}

std::string shape_mismatch(const json& expected, const json& actual, double tolerance,
                           const std::string& where) {
  if (expected.is_number()) {
    if (!actual.is_number()) return where + ": expected a number";
    const double d = std::abs(expected.get<double>() - actual.get<double>());
    return d <= tolerance ? "" : where + ": differs by " + std::to_string(d);
  }
  if (expected.type() != actual.type()) return where + ": type differs";
  if (expected.is_object()) {
    if (expected.size() != actual.size()) return where + ": key sets differ";
    for (const auto& [k, v] : expected.items()) {
      if (!actual.contains(k)) return where + ": missing key " + k;
      if (auto m = shape_mismatch(v, actual.at(k), tolerance, where + "." + k); !m.empty()) {
        return m;
      }
    }
    return "";
  }
  if (expected.is_array()) {
    if (expected.size() != actual.size()) return where + ": length differs";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      auto m = shape_mismatch(expected[i], actual[i], tolerance,
                              where + "[" + std::to_string(i) + "]");
      if (!m.empty()) return m;
    }
    return "";
  }
  return expected == actual ? "" : where + ": value differs";
}

StressReport stress_submit_query(ServiceRig& rig, const std::vector<IsingGraph>& graphs,
                                 int depth, int operations, int threads, std::uint64_t seed) {
  std::vector<std::string> keys;
  for (const auto& g : graphs) keys.push_back(canonicalize(g).key);

  std::atomic<bool> done{false};
  std::atomic<int> decreases{0};
  std::thread monitor([&] {
    std::vector<double> last(keys.size(), -INFINITY);
    while (!done.load()) {
      for (std::size_t k = 0; k < keys.size(); ++k) {
        const auto rec = rig.banks.params.find(keys[k], depth);
        if (!rec) continue;
        if (rec->score < last[k]) decreases.fetch_add(1);
        last[k] = rec->score;
      }
    }
  });

  std::mutex accepted_mutex;
  std::vector<double> best_accepted(keys.size(), -INFINITY);
  std::atomic<int> ops{0}, successes{0}, failures{0}, errors{0};
  std::vector<std::thread> workers;
  for (int t = 0; t < threads; ++t) {
    workers.emplace_back([&, t] {
      std::mt19937_64 rng(seed + static_cast<std::uint64_t>(t));
      std::normal_distribution<double> noise(0.0, 0.08);
      while (ops.fetch_add(1) < operations) {
        const std::size_t k = rng() % graphs.size();
        const auto graph_json = to_json(graphs[k]);
        const auto q = rig.service.handle(api_request("query_parameter", graph_json, depth));
        if (q.at("status") != "success") {
          errors.fetch_add(1);
          continue;
        }
        if (rng() % 3 == 0) continue;  // query-only step
        auto v = q.at("parameter").get<std::vector<double>>();
        switch (rng() % 4) {
          case 0: {  // almost always worse
            const auto fresh = random_parameters(depth, rng);
            v.assign(fresh.values().begin(), fresh.values().end());
            break;
          }
          case 1:
            for (auto& x : v) x += noise(rng);
            break;
          default: {  // a short local climb, usually better
            for (auto& x : v) x += 0.1 * noise(rng);
            const auto climbed = local_optimize(QaoaEvaluator(graphs[k]), ParameterVector(v),
                                                Method::simplex, 12, 0.05);
            v.assign(climbed.params.values().begin(), climbed.params.values().end());
          }
        }
        const auto s = rig.service.handle(
            api_request("submit_parameter", graph_json, depth, ParameterVector(v)));
        const auto status = s.at("status").get<std::string>();
        if (status == "success") {
          successes.fetch_add(1);
          std::lock_guard lock(accepted_mutex);
          best_accepted[k] =
              std::max(best_accepted[k], s.at("score_dict").at("user_score").get<double>());
        } else if (status == "fail") {
          failures.fetch_add(1);
        } else {
          errors.fetch_add(1);
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  done.store(true);
  monitor.join();

  StressReport report;
  report.operations = operations;
  report.successes = successes.load();
  report.failures = failures.load();
  report.errors = errors.load();
  report.decreases = decreases.load();
  report.final_state_consistent = true;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    const auto rec = rig.banks.params.find(keys[k], depth);
    if (std::isinf(best_accepted[k])) {
      report.final_state_consistent &= rec == nullptr;
      continue;
    }
    report.final_state_consistent &=
        rec != nullptr && rec->score == best_accepted[k] &&
        std::abs(QaoaEvaluator(graphs[k]).score(rec->params) - rec->score) <= 1e-9;
  }
  return report;
}

}  // namespace qaccel::fx
