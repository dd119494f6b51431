#include "qaccel/service.hpp"

#include <chrono>
#include <cmath>

#include <httplib.h>

#include "qaccel/errors.hpp"
#include "qaccel/optim.hpp"

namespace qaccel {

namespace {

class RequestError : public Error {
public:
  using Error::Error;
};

using Clock = std::chrono::steady_clock;

nlohmann::json query_response(std::string_view status, const nlohmann::json& parameter,
                              const std::string& message = {}) {
  nlohmann::json r = {{"status", status}, {"parameter", parameter}};
  if (!message.empty()) r["message"] = message;
  return r;
}

nlohmann::json score_response(std::string_view status, const nlohmann::json& scores,
                              const std::string& message = {}) {
  nlohmann::json r = {{"status", status}, {"score_dict", scores}};
  if (!message.empty()) r["message"] = message;
  return r;
}

}  // namespace

struct ApiService::Parsed {
  IsingGraph graph;
  int depth = 0;
  std::optional<ParameterVector> user;
  Clock::time_point deadline;
};

ApiService::ApiService(Databanks& banks, ScheduleSet schedules, GeneratorConfig generator,
                       ServiceOptions options)
    : banks_(banks),
      schedules_(std::move(schedules)),
      generator_(std::move(generator)),
      options_(std::move(options)),
      rng_(options_.seed) {}

ApiService::Parsed ApiService::parse(const nlohmann::json& request,
                                     bool needs_user_parameter) const {
  Parsed p;
  p.deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                  std::chrono::duration<double>(options_.timeout_seconds));
  if (!request.contains("graph_data")) throw RequestError("missing graph_data");
  try {
    p.graph = parse_graph(request.at("graph_data"), options_.node_count);
  } catch (const GraphError& e) {
    throw RequestError(std::string("invalid graph_data: ") + e.what());
  }
  if (p.graph.node_count() > options_.qubit_ceiling) {
    throw RequestError("graph has " + std::to_string(p.graph.node_count()) +
                       " nodes, above the limit of " + std::to_string(options_.qubit_ceiling));
  }
  const auto& depth = request.contains("qc_depth") ? request.at("qc_depth") : nlohmann::json();
  if (!depth.is_number_integer()) throw RequestError("qc_depth must be an integer");
  p.depth = depth.get<int>();
  if (options_.depths.count(p.depth) == 0) {
    throw RequestError("unsupported qc_depth " + std::to_string(p.depth));
  }
  if (needs_user_parameter) {
    if (!request.contains("user_parameter") || !request.at("user_parameter").is_array()) {
      throw RequestError("user_parameter must be a list of numbers");
    }
    const auto& list = request.at("user_parameter");
    if (list.size() != static_cast<std::size_t>(2 * p.depth)) {
      throw RequestError("user_parameter needs " + std::to_string(2 * p.depth) +
                         " values for qc_depth " + std::to_string(p.depth));
    }
    std::vector<double> values;
    for (const auto& v : list) {
      if (!v.is_number()) throw RequestError("user_parameter must be a list of numbers");
      values.push_back(v.get<double>());
    }
    try {
      p.user = ParameterVector(std::move(values));
    } catch (const std::invalid_argument& e) {
      throw RequestError(std::string("invalid user_parameter: ") + e.what());
    }
  }
  return p;
}

GenerationResult ApiService::current_best(const QaoaEvaluator& evaluator, const IsingGraph& g,
                                          int depth) const {
  return generate_best(evaluator, g, depth, banks_, schedules_, generator_).best;
}

nlohmann::json ApiService::handle_query(const nlohmann::json& request) {
  try {
    auto p = parse(request, false);
    const QaoaEvaluator evaluator(p.graph, options_.qubit_ceiling);
    GenerationResult best;
    try {
      best = current_best(evaluator, p.graph, p.depth);
    } catch (const GeneratorError& e) {
      return query_response("fail", nlohmann::json::array(), e.what());
    }
    if (Clock::now() > p.deadline) throw RequestError("evaluation timed out");
    auto v = best.params.values();
    return query_response("success", std::vector<double>(v.begin(), v.end()));
  } catch (const Error& e) {
    return query_response("error", nlohmann::json::array(), e.what());
  }
}

nlohmann::json ApiService::handle_submit(const nlohmann::json& request) {
  try {
    auto p = parse(request, true);
    const QaoaEvaluator evaluator(p.graph, options_.qubit_ceiling);
    std::lock_guard lock(submit_mutex_);
    GenerationResult best;
    try {
      best = current_best(evaluator, p.graph, p.depth);
    } catch (const GeneratorError& e) {
      return score_response("fail", nlohmann::json::object(), e.what());
    }
    const double user_score = evaluator.score(*p.user);
    if (Clock::now() > p.deadline) throw RequestError("evaluation timed out");
    nlohmann::json scores = {{"max_score", best.score}, {"user_score", user_score}};
    if (!(user_score > best.score)) return score_response("fail", scores);

    auto rec = make_param_record(p.graph, *p.user, user_score, Provenance::user_submission);
    banks_.params.upsert_if_better(
        std::move(rec), [&](const ParamRecord& r) { return evaluator.score(r.params); });
    if (!options_.persist_dir.empty()) banks_.save(options_.persist_dir);
    return score_response("success", scores);
  } catch (const Error& e) {
    return score_response("error", nlohmann::json::object(), e.what());
  }
}

nlohmann::json ApiService::handle_compare(const nlohmann::json& request) {
  try {
    auto p = parse(request, true);
    const QaoaEvaluator evaluator(p.graph, options_.qubit_ceiling);
    GenerationResult best;
    try {
      best = current_best(evaluator, p.graph, p.depth);
    } catch (const GeneratorError& e) {
      return score_response("fail", nlohmann::json::object(), e.what());
    }
    ParameterVector random;
    {
      std::lock_guard lock(rng_mutex_);
      random = random_parameters(p.depth, rng_);
    }
    nlohmann::json scores = {{"max_score", best.score},
                             {"user_score", evaluator.score(*p.user)},
                             {"random_score", evaluator.score(random)}};
    if (Clock::now() > p.deadline) throw RequestError("evaluation timed out");
    return score_response("success", scores);
  } catch (const Error& e) {
    return score_response("error", nlohmann::json::object(), e.what());
  }
}

nlohmann::json ApiService::handle(const nlohmann::json& request) {
  if (!request.is_object()) {
    return {{"status", "error"}, {"message", "request body must be a JSON object"}};
  }
  const auto name = request.value("api_name", nlohmann::json()).is_string()
                        ? request["api_name"].get<std::string>()
                        : std::string();
  if (name == "query_parameter") return handle_query(request);
  if (name == "submit_parameter") return handle_submit(request);
  if (name == "compare_parameter") return handle_compare(request);
  return {{"status", "error"}, {"message", "unknown api_name '" + name + "'"}};
}

nlohmann::json ApiService::handle_body(std::string_view body) {
  nlohmann::json request;
  try {
    request = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    return {{"status", "error"}, {"message", std::string("malformed JSON: ") + e.what()}};
  }
  return handle(request);
}

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(ApiService& service, const ServiceSettings& settings)
    : impl_(std::make_unique<Impl>()) {
  auto& srv = impl_->server;
  srv.set_payload_max_length(settings.body_limit);
  srv.Post("/api", [&service](const httplib::Request& req, httplib::Response& res) {
    res.set_content(service.handle_body(req.body).dump(), "application/json");
  });
  srv.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok"})", "application/json");
  });
  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    nlohmann::json body = {{"status", "error"},
                           {"message", res.status == 413 ? "request body too large"
                                                         : "HTTP " + std::to_string(res.status)}};
    res.set_content(body.dump(), "application/json");
  });
  if (!settings.static_dir.empty() && std::filesystem::is_directory(settings.static_dir)) {
    srv.set_mount_point("/", settings.static_dir.string());
  }
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error("cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace qaccel
