#include "qaccel/config.hpp"

#include <cstdlib>
#include <fstream>

#include "qaccel/errors.hpp"

namespace qaccel {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.empty() || path.is_absolute() || base.empty()) return path;
  return base / path;
}

}  // namespace

void AppConfig::set_listen(const std::string& listen) {
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) throw ConfigError("listen address must be host:port");
  try {
    service.port = std::stoi(listen.substr(colon + 1));
  } catch (const std::exception&) {
    throw ConfigError("invalid port in listen address '" + listen + "'");
  }
  if (service.port < 0 || service.port > 65535) throw ConfigError("port out of range");
  service.host = listen.substr(0, colon);
}

AppConfig AppConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base) {
  AppConfig c;
  try {
    if (j.contains("profile")) {
      c.profile = j["profile"].is_string() ? Profile::by_name(j["profile"].get<std::string>())
                                           : Profile::from_json(j["profile"]);
    }
    if (j.contains("stores_dir")) c.stores_dir = resolve(base, j["stores_dir"].get<std::string>());
    c.schedules_path = resolve(base, j.value("schedules", c.schedules_path.string()));
    if (j.contains("metric")) {
      const auto& m = j["metric"];
      c.metric_mode = parse_metric_mode(m.value("mode", "simplified"));
      if (m.contains("file")) c.metric_path = resolve(base, m["file"].get<std::string>());
      c.bucket_width = m.value("bucket", c.bucket_width);
    }
    if (j.contains("scaling")) c.scaling = ScalingModel::from_json(j["scaling"]);
    if (j.contains("daemon")) c.daemon = SearchConfig::from_json(j["daemon"]);
    if (j.contains("service")) {
      const auto& s = j["service"];
      if (s.contains("listen")) c.set_listen(s["listen"].get<std::string>());
      c.service.body_limit = s.value("body_limit", c.service.body_limit);
      c.service.timeout_seconds = s.value("timeout_seconds", c.service.timeout_seconds);
      c.service.qubit_ceiling = s.value("qubit_ceiling", c.service.qubit_ceiling);
      if (s.contains("static_dir")) {
        c.service.static_dir = resolve(base, s["static_dir"].get<std::string>());
      }
      c.service.daemon = s.value("daemon", c.service.daemon);
    }
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  if (!(c.bucket_width > 0.0)) throw ConfigError("metric bucket must be > 0");
  if (c.metric_mode == MetricMode::mahalanobis && c.metric_path.empty()) {
    throw ConfigError("mahalanobis mode needs metric.file");
  }
  return c;
}

AppConfig AppConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("malformed config file " + path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

nlohmann::json AppConfig::to_json() const {
  nlohmann::json metric = {{"mode", std::string(to_string(metric_mode))}, {"bucket", bucket_width}};
  if (!metric_path.empty()) metric["file"] = metric_path.string();
  return {{"profile", profile.to_json()},
          {"stores_dir", stores_dir.string()},
          {"schedules", schedules_path.string()},
          {"metric", metric},
          {"scaling", scaling.to_json()},
          {"daemon", daemon.to_json()},
          {"service",
           {{"listen", service.host + ":" + std::to_string(service.port)},
            {"body_limit", service.body_limit},
            {"timeout_seconds", service.timeout_seconds},
            {"qubit_ceiling", service.qubit_ceiling},
            {"static_dir", service.static_dir.string()},
            {"daemon", service.daemon}}},
          {"seed", seed}};
}

void AppConfig::apply_environment() {
  if (const char* v = std::getenv("QACCEL_LISTEN"); v && *v) set_listen(v);
  if (const char* v = std::getenv("QACCEL_STORES_DIR"); v && *v) stores_dir = v;
  if (const char* v = std::getenv("QACCEL_PROFILE"); v && *v) profile = Profile::by_name(v);
}

ScheduleSet AppConfig::load_schedules() const { return ScheduleSet::load(schedules_path); }

DistanceModel AppConfig::distance_model(const ParamStore& standardize_over) const {
  switch (metric_mode) {
    case MetricMode::simplified:
      return DistanceModel::simplified(bucket_width);
    case MetricMode::euclidean: {
      std::vector<std::vector<double>> coords;
      for (const auto& r : standardize_over.snapshot_all()) coords.push_back(r->coordinate.vector());
      return DistanceModel::euclidean(coords.empty()
                                          ? Standardizer::identity(GraphCoordinate::kDimension)
                                          : Standardizer::fit(coords));
    }
    case MetricMode::mahalanobis: {
      auto loaded = load_metric(metric_path);
      return DistanceModel::mahalanobis(std::move(loaded.metric), std::move(loaded.standardizer));
    }
  }
  throw ConfigError("unknown metric mode");
}

GeneratorConfig AppConfig::generator_config(const ParamStore& standardize_over) const {
  GeneratorConfig g;
  g.model = scaling;
  g.distance = distance_model(standardize_over);
  return g;
}

}  // namespace qaccel
