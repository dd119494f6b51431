#include "qaccel/databank.hpp"

#include <chrono>

namespace qaccel {

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::search_daemon:
      return "search-daemon";
    case Provenance::user_submission:
      return "user-submission";
    case Provenance::import:
      return "import";
  }
  return "unknown";
}

Provenance parse_provenance(std::string_view s) {
  if (s == "search-daemon") return Provenance::search_daemon;
  if (s == "user-submission") return Provenance::user_submission;
  if (s == "import") return Provenance::import;
  throw DatabankError("unknown provenance '" + std::string(s) + "'");
}

std::string_view to_string(UpsertOutcome o) {
  switch (o) {
    case UpsertOutcome::created:
      return "created";
    case UpsertOutcome::replaced:
      return "replaced";
    case UpsertOutcome::rejected:
      return "rejected";
  }
  return "unknown";
}

std::int64_t now_millis() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

namespace {

nlohmann::json graph_field(const IsingGraph& g) {
  auto j = to_json(g);
  j["n"] = g.node_count();
  return j;
}

IsingGraph graph_from_field(const nlohmann::json& j) {
  return parse_graph(j, j.at("n").get<int>());
}

std::string checked_key(const nlohmann::json& j, const IsingGraph& g) {
  auto key = j.at("key").get<std::string>();
  if (canonicalize(g).key != key) throw DatabankError("key does not match graph " + key);
  return key;
}

}  // namespace

nlohmann::json ParamRecord::to_json() const {
  return {{"key", key},
          {"graph", graph_field(graph)},
          {"coordinate", qaccel::to_json(coordinate)},
          {"depth", depth},
          {"params", qaccel::to_json(params)},
          {"score", score},
          {"provenance", std::string(to_string(provenance))},
          {"updated_at", updated_at}};
}

ParamRecord ParamRecord::from_json(const nlohmann::json& j) {
  ParamRecord r;
  r.graph = graph_from_field(j.at("graph"));
  r.key = checked_key(j, r.graph);
  r.coordinate = coordinate_from_json(j.at("coordinate"));
  r.depth = j.at("depth").get<int>();
  r.params = params_from_json(j.at("params"));
  if (r.params.depth() != r.depth) throw DatabankError("params length does not match depth");
  r.score = j.at("score").get<double>();
  r.provenance = parse_provenance(j.at("provenance").get<std::string>());
  r.updated_at = j.at("updated_at").get<std::int64_t>();
  return r;
}

nlohmann::json FactorRecord::to_json() const {
  return {{"key", key},
          {"graph", graph_field(graph)},
          {"coordinate", qaccel::to_json(coordinate)},
          {"depth", depth},
          {"factor", factor},
          {"score", score},
          {"updated_at", updated_at}};
}

FactorRecord FactorRecord::from_json(const nlohmann::json& j) {
  FactorRecord r;
  r.graph = graph_from_field(j.at("graph"));
  r.key = checked_key(j, r.graph);
  r.coordinate = coordinate_from_json(j.at("coordinate"));
  r.depth = j.at("depth").get<int>();
  r.factor = j.at("factor").get<double>();
  if (!(r.factor > 0.0) || !std::isfinite(r.factor)) throw DatabankError("factor must be positive");
  r.score = j.at("score").get<double>();
  r.updated_at = j.at("updated_at").get<std::int64_t>();
  return r;
}

ParamRecord make_param_record(const IsingGraph& g, const ParameterVector& params,
                              double score, Provenance provenance) {
  auto canon = canonicalize(g);
  ParamRecord r;
  r.key = std::move(canon.key);
  r.coordinate = infer_coordinate(canon.graph);
  r.graph = std::move(canon.graph);
  r.depth = params.depth();
  r.params = params;
  r.score = score;
  r.provenance = provenance;
  r.updated_at = now_millis();
  return r;
}

FactorRecord make_factor_record(const IsingGraph& g, int depth, double factor,
                                double score) {
  if (!(factor > 0.0)) throw DatabankError("factor must be positive");
  auto canon = canonicalize(g);
  FactorRecord r;
  r.key = std::move(canon.key);
  r.coordinate = infer_coordinate(canon.graph);
  r.graph = std::move(canon.graph);
  r.depth = depth;
  r.factor = factor;
  r.score = score;
  r.updated_at = now_millis();
  return r;
}

void Databanks::save(const std::filesystem::path& dir) const {
  params.save(dir / kParamsFile);
  factors.save(dir / kFactorsFile);
}

Databanks Databanks::load(const std::filesystem::path& dir) {
  Databanks d;
  d.params = ParamStore::load_or_empty(dir / kParamsFile);
  d.factors = FactorStore::load_or_empty(dir / kFactorsFile);
  return d;
}

std::vector<Neighbor> nearest_records(const GraphCoordinate& query, int depth,
                                      const ParamStore& store, std::size_t k,
                                      const DistanceModel& distance,
                                      std::string_view exclude_key) {
  std::vector<Neighbor> out;
  for (auto& [d, rec] : nearest(query, store.snapshot(depth), k, distance, exclude_key)) {
    out.push_back({d, std::move(rec)});
  }
  return out;
}

}  // namespace qaccel
