#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>

#include <json.hpp>

#include "qaccel/config.hpp"
#include "qaccel/databank.hpp"
#include "qaccel/generators.hpp"

namespace qaccel {

struct ServiceOptions {
  std::set<int> depths{4, 8};
  /// Fixed node count for incoming graphs; inferred from ids when unset.
  std::optional<int> node_count;
  int qubit_ceiling = kDefaultQubitCeiling;
  double timeout_seconds = 30.0;
  /// Stores are saved here after every accepted submission when set.
  std::filesystem::path persist_dir;
  std::uint64_t seed = 1;
};

/// Request dispatch for the three API calls. Thread-safe: queries and
/// compares run concurrently, submissions are serialized.
class ApiService {
public:
  ApiService(Databanks& banks, ScheduleSet schedules, GeneratorConfig generator,
             ServiceOptions options);

  nlohmann::json handle(const nlohmann::json& request);
  /// Parses a raw body first; malformed JSON yields an error response.
  nlohmann::json handle_body(std::string_view body);

  nlohmann::json handle_query(const nlohmann::json& request);
  nlohmann::json handle_submit(const nlohmann::json& request);
  nlohmann::json handle_compare(const nlohmann::json& request);

  const ServiceOptions& options() const noexcept { return options_; }
  DatabankStats stats() const { return banks_.stats(); }

private:
  struct Parsed;
  Parsed parse(const nlohmann::json& request, bool needs_user_parameter) const;
  GenerationResult current_best(const QaoaEvaluator& evaluator, const IsingGraph& g,
                                int depth) const;

  Databanks& banks_;
  ScheduleSet schedules_;
  GeneratorConfig generator_;
  ServiceOptions options_;
  std::mutex submit_mutex_;
  std::mutex rng_mutex_;
  std::mt19937_64 rng_;
};

/// HTTP front end: POST /api, GET /healthz and static files at "/".
class HttpServer {
public:
  HttpServer(ApiService& service, const ServiceSettings& settings);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds host:port (port 0 picks a free port) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called.
  void listen();
  void stop();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace qaccel
