#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "qaccel/databank.hpp"
#include "qaccel/generators.hpp"
#include "qaccel/optim.hpp"

namespace qaccel {

struct MutationConfig {
  /// Relative standard deviation of a weight perturbation.
  double weight_sigma = 0.1;
  /// Probability that an edit adds or removes an edge instead of
  /// perturbing a weight.
  double edge_toggle_probability = 0.3;
  int max_mutations = 3;
  int children_per_parent = 3;
  int max_generation = 8;

  void validate() const;
  nlohmann::json to_json() const;
  static MutationConfig from_json(const nlohmann::json& j);
};

/// Applies between 1 and max_mutations random edits (none when
/// max_mutations is 0). Edits that would leave no edges, add an edge to a
/// complete graph or perturb a point-mass weight are redrawn. Discrete
/// weight families stay on their integer support.
IsingGraph mutate(const IsingGraph& g, const MutationConfig& cfg, std::mt19937_64& rng);

/// Priority given to tasks with no finite-distance record nearby.
inline constexpr double kUncoveredPriority = std::numeric_limits<double>::max();

struct SearchTask {
  std::uint64_t id = 0;
  IsingGraph graph;
  int depth = 0;
  std::optional<ParameterVector> init_params;
  int generation = 0;
  std::optional<std::string> parent_key;
  double priority = 0.0;
};

struct SearchConfig {
  /// Schedule for tasks without inherited parameters.
  OptSchedule root_schedule;
  /// Schedule for child tasks starting from their parent's parameters.
  OptSchedule child_schedule;
  MutationConfig mutation;
  bool optimize_factors = true;
  std::size_t workers = 1;
  /// Cost units per second across the pool; 0 disables throttling.
  double evaluation_rate = 0.0;
  std::uint64_t seed = 1;

  static SearchConfig defaults();
  nlohmann::json to_json() const;
  static SearchConfig from_json(const nlohmann::json& j);
};

/// One store write attempted by the daemon.
struct UpsertEvent {
  std::uint64_t task_id = 0;
  std::string store;  // "params" or "factors"
  std::string key;
  int depth = 0;
  double score = 0.0;
  UpsertOutcome outcome = UpsertOutcome::rejected;
  int generation = 0;
  std::string parent_key;
  /// Inherited initial parameters, empty for root tasks.
  std::vector<double> init_params;

  nlohmann::json to_json() const;
  friend bool operator==(const UpsertEvent&, const UpsertEvent&) = default;
};

struct ChainStepResult {
  std::string key;
  OptResult optimized;
  std::optional<FactorFit> factor;
  std::vector<SearchTask> children;  // ids and priorities unassigned
  int cost = 0;
};

struct RunReport {
  std::size_t tasks_completed = 0;
  std::size_t tasks_failed = 0;
  std::size_t params_created = 0;
  std::size_t params_replaced = 0;
  std::size_t factors_written = 0;
  std::size_t queue_remaining = 0;
};

/// Chained genetic search: optimize a graph, store the result, and queue
/// mutated children that start from the optimized parameters.
///
/// Tasks are taken from the queue in batches of `workers`, executed
/// concurrently without touching the stores, then committed in pop order.
/// The upsert sequence therefore depends only on seeds and budgets.
class SearchDaemon {
public:
  SearchDaemon(Databanks& banks, ScheduleSet schedules, GeneratorConfig generator,
               SearchConfig config);

  /// Queues one generation-0 task per (graph, depth).
  void seed(const std::vector<IsingGraph>& graphs, const std::vector<int>& depths);

  /// Optimizes one task and produces its children without writing.
  ChainStepResult chain_step(const SearchTask& task) const;

  /// Processes up to `max_tasks` tasks or until `stop` is set, finishing the
  /// batch in flight. When `stores_dir` is non-empty the stores are saved
  /// there before returning.
  RunReport run(std::size_t max_tasks, const std::atomic<bool>* stop = nullptr,
                const std::filesystem::path& stores_dir = {});

  const std::vector<UpsertEvent>& log() const noexcept { return log_; }
  /// Receives every event as it is committed.
  void set_event_sink(std::function<void(const UpsertEvent&)> sink) { sink_ = std::move(sink); }
  std::size_t queue_size() const noexcept { return queue_.size(); }

private:
  struct ByPriority {
    bool operator()(const SearchTask& a, const SearchTask& b) const {
      if (a.priority != b.priority) return a.priority > b.priority;
      return a.id < b.id;
    }
  };

  void push(SearchTask task);
  double coverage_priority(const IsingGraph& g, int depth) const;
  void commit(const SearchTask& task, ChainStepResult& result, RunReport& report);
  void record(UpsertEvent e);

  Databanks& banks_;
  ScheduleSet schedules_;
  GeneratorConfig generator_;
  SearchConfig config_;
  std::set<SearchTask, ByPriority> queue_;
  std::uint64_t next_id_ = 0;
  std::vector<UpsertEvent> log_;
  std::function<void(const UpsertEvent&)> sink_;
};

}  // namespace qaccel
