#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "qaccel/corpus.hpp"
#include "qaccel/generators.hpp"
#include "qaccel/metric.hpp"
#include "qaccel/searchd.hpp"

namespace qaccel {

struct ServiceSettings {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t body_limit = 1 << 20;
  double timeout_seconds = 30.0;
  int qubit_ceiling = kDefaultQubitCeiling;
  /// Directory served at "/"; empty disables it.
  std::filesystem::path static_dir;
  /// Run the search daemon inside the server process.
  bool daemon = false;
};

/// The whole configuration tree:
///
///   {"profile": {...}, "stores_dir": "...", "schedules": "...",
///    "metric": {"mode": "simplified", "file": "...", "bucket": 0.05},
///    "scaling": {"coefficient": 1.56, "alpha_exponent": -1},
///    "daemon": {...}, "service": {"listen": "host:port", ...}, "seed": 1}
///
/// Relative paths resolve against the config file's directory.
struct AppConfig {
  Profile profile = Profile::hackathon();
  std::filesystem::path stores_dir = "stores";
  std::filesystem::path schedules_path = "data/schedules.json";
  MetricMode metric_mode = MetricMode::simplified;
  std::filesystem::path metric_path;
  double bucket_width = 0.05;
  ScalingModel scaling;
  SearchConfig daemon = SearchConfig::defaults();
  ServiceSettings service;
  std::uint64_t seed = 1;

  static AppConfig from_json(const nlohmann::json& j, const std::filesystem::path& base = {});
  static AppConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  /// QACCEL_LISTEN (host:port), QACCEL_STORES_DIR and QACCEL_PROFILE.
  void apply_environment();
  void set_listen(const std::string& listen);

  ScheduleSet load_schedules() const;
  /// Distance model for the configured mode. The vector modes standardize
  /// over the coordinates of `standardize_over` records.
  DistanceModel distance_model(const ParamStore& standardize_over) const;
  GeneratorConfig generator_config(const ParamStore& standardize_over) const;
};

}  // namespace qaccel
