#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qaccel/coordinate.hpp"
#include "qaccel/errors.hpp"
#include "qaccel/graph.hpp"
#include "qaccel/metric.hpp"
#include "qaccel/params.hpp"

namespace qaccel {

enum class Provenance { search_daemon, user_submission, import };
std::string_view to_string(Provenance p);
Provenance parse_provenance(std::string_view s);

/// Optimized parameters for one (graph, depth).
struct ParamRecord {
  std::string key;
  IsingGraph graph;
  GraphCoordinate coordinate;
  int depth = 0;
  ParameterVector params;
  double score = 0.0;
  Provenance provenance = Provenance::search_daemon;
  std::int64_t updated_at = 0;  // unix milliseconds

  static constexpr std::string_view kKind = "params";
  nlohmann::json to_json() const;
  static ParamRecord from_json(const nlohmann::json& j);
  friend bool operator==(const ParamRecord&, const ParamRecord&) = default;
};

/// Optimized gamma scaling factor for one (graph, depth).
struct FactorRecord {
  std::string key;
  IsingGraph graph;
  GraphCoordinate coordinate;
  int depth = 0;
  double factor = 0.0;
  double score = 0.0;
  std::int64_t updated_at = 0;

  static constexpr std::string_view kKind = "factors";
  nlohmann::json to_json() const;
  static FactorRecord from_json(const nlohmann::json& j);
  friend bool operator==(const FactorRecord&, const FactorRecord&) = default;
};

/// Builds a ParamRecord from a graph, computing key and coordinate.
ParamRecord make_param_record(const IsingGraph& g, const ParameterVector& params,
                              double score, Provenance provenance);
FactorRecord make_factor_record(const IsingGraph& g, int depth, double factor,
                                double score);

std::int64_t now_millis();

enum class UpsertOutcome { created, replaced, rejected };
std::string_view to_string(UpsertOutcome o);

struct MergeReport {
  std::size_t created = 0;
  std::size_t replaced = 0;
  std::size_t rejected = 0;
};

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kSchemaName = "qaccel-databank";
/// Allowed gap between a stored score and its re-evaluation when writing.
inline constexpr double kWriteTolerance = 1e-6;

/// In-memory record store keyed by (canonical key, depth) with
/// upsert-if-better semantics and JSON-lines persistence.
///
/// Readers take a shared lock and receive shared pointers to immutable
/// records, so a snapshot stays valid while writers replace entries. Writes
/// are serialized by an exclusive lock.
template <class Record>
class RecordStore {
public:
  using RecordPtr = std::shared_ptr<const Record>;
  /// Re-evaluates a record's score.
  using Verifier = std::function<double(const Record&)>;

  RecordStore() = default;
  RecordStore(const RecordStore& other) : records_(other.snapshot_map()) {}
  RecordStore& operator=(const RecordStore& other) {
    if (this != &other) {
      auto copy = other.snapshot_map();
      std::unique_lock lock(mutex_);
      records_ = std::move(copy);
    }
    return *this;
  }

  /// created when (key, depth) is absent, replaced when the new score is
  /// strictly greater, rejected otherwise. With a verifier, the record's
  /// score must reproduce within kWriteTolerance or IntegrityError is thrown
  /// and nothing is written.
  UpsertOutcome upsert_if_better(Record record, const Verifier& verify = {}) {
    if (verify) {
      const double actual = verify(record);
      if (!(std::abs(actual - record.score) <= kWriteTolerance)) {
        throw IntegrityError(record.key, "score of record " + record.key + " re-evaluates to " +
                                             std::to_string(actual) + ", not " +
                                             std::to_string(record.score));
      }
    }
    std::unique_lock lock(mutex_);
    auto id = std::make_pair(record.key, record.depth);
    auto it = records_.find(id);
    if (it == records_.end()) {
      records_.emplace(std::move(id), std::make_shared<const Record>(std::move(record)));
      return UpsertOutcome::created;
    }
    if (record.score > it->second->score) {
      it->second = std::make_shared<const Record>(std::move(record));
      return UpsertOutcome::replaced;
    }
    return UpsertOutcome::rejected;
  }

  RecordPtr find(const std::string& key, int depth) const {
    std::shared_lock lock(mutex_);
    auto it = records_.find(std::make_pair(key, depth));
    return it == records_.end() ? nullptr : it->second;
  }

  /// Records at one depth in (key) order.
  std::vector<RecordPtr> snapshot(int depth) const {
    std::shared_lock lock(mutex_);
    std::vector<RecordPtr> out;
    for (const auto& [id, rec] : records_) {
      if (id.second == depth) out.push_back(rec);
    }
    return out;
  }

  std::vector<RecordPtr> snapshot_all() const {
    std::shared_lock lock(mutex_);
    std::vector<RecordPtr> out;
    out.reserve(records_.size());
    for (const auto& [id, rec] : records_) out.push_back(rec);
    return out;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return records_.size();
  }

  bool operator==(const RecordStore& other) const {
    auto a = snapshot_all();
    auto b = other.snapshot_all();
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!(*a[i] == *b[i])) return false;
    }
    return true;
  }

  /// Per (key, depth) upsert of every imported record.
  MergeReport merge(const RecordStore& imported, const Verifier& verify = {}) {
    MergeReport report;
    for (const auto& rec : imported.snapshot_all()) {
      switch (upsert_if_better(*rec, verify)) {
        case UpsertOutcome::created:
          ++report.created;
          break;
        case UpsertOutcome::replaced:
          ++report.replaced;
          break;
        case UpsertOutcome::rejected:
          ++report.rejected;
          break;
      }
    }
    return report;
  }

  /// Writes a header line and one record per line, then atomically renames
  /// the temporary file over `path`.
  void save(const std::filesystem::path& path) const {
    auto records = snapshot_all();
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      if (!out) throw DatabankError("cannot write " + tmp.string());
      out << header().dump() << '\n';
      for (const auto& r : records) out << r->to_json().dump() << '\n';
      out.flush();
      if (!out) throw DatabankError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
  }

  static RecordStore load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DatabankError("cannot read " + path.string());
    RecordStore store;
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
      ++line_no;
      const bool complete = !in.eof();
      if (line.empty() && complete) continue;
      if (line.empty()) break;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw DatabankError(path.string() + ":" + std::to_string(line_no) +
                            ": malformed line (" + e.what() + ")");
      }
      if (!saw_header) {
        check_header(j, path, line_no);
        saw_header = true;
        continue;
      }
      if (!complete) {
        throw DatabankError(path.string() + ":" + std::to_string(line_no) +
                            ": truncated record (missing newline)");
      }
      Record r;
      try {
        r = Record::from_json(j);
      } catch (const std::exception& e) {
        throw DatabankError(path.string() + ":" + std::to_string(line_no) +
                            ": invalid record (" + e.what() + ")");
      }
      auto id = std::make_pair(r.key, r.depth);
      if (!store.records_.emplace(std::move(id), std::make_shared<const Record>(std::move(r)))
               .second) {
        throw DatabankError(path.string() + ":" + std::to_string(line_no) +
                            ": duplicate (key, depth)");
      }
    }
    if (!saw_header) throw DatabankError(path.string() + ": missing schema header");
    return store;
  }

  /// Loads when the file exists, otherwise returns an empty store.
  static RecordStore load_or_empty(const std::filesystem::path& path) {
    return std::filesystem::exists(path) ? load(path) : RecordStore{};
  }

  static nlohmann::json header() {
    return {{"schema", std::string(kSchemaName)},
            {"version", kSchemaVersion},
            {"kind", std::string(Record::kKind)}};
  }

private:
  using Key = std::pair<std::string, int>;

  std::map<Key, RecordPtr> snapshot_map() const {
    std::shared_lock lock(mutex_);
    return records_;
  }

  static void check_header(const nlohmann::json& j, const std::filesystem::path& path,
                           std::size_t line_no) {
    const auto where = path.string() + ":" + std::to_string(line_no) + ": ";
    if (!j.is_object() || j.value("schema", "") != kSchemaName) {
      throw DatabankError(where + "missing schema header");
    }
    if (j.value("version", -1) != kSchemaVersion) {
      throw DatabankError(where + "unsupported schema version " + j.value("version", nlohmann::json()).dump());
    }
    if (j.value("kind", "") != Record::kKind) {
      throw DatabankError(where + "store kind '" + j.value("kind", "") + "' where '" +
                          std::string(Record::kKind) + "' was expected");
    }
  }

  mutable std::shared_mutex mutex_;
  std::map<Key, RecordPtr> records_;
};

using ParamStore = RecordStore<ParamRecord>;
using FactorStore = RecordStore<FactorRecord>;

struct DatabankStats {
  std::size_t param_records = 0;   // S_p
  std::size_t factor_records = 0;  // S_o
};

/// The two stores the generators and the search daemon share.
struct Databanks {
  ParamStore params;
  FactorStore factors;

  DatabankStats stats() const { return {params.size(), factors.size()}; }

  static constexpr std::string_view kParamsFile = "params.jsonl";
  static constexpr std::string_view kFactorsFile = "factors.jsonl";
  void save(const std::filesystem::path& dir) const;
  static Databanks load(const std::filesystem::path& dir);
};

struct Neighbor {
  double distance = 0.0;
  std::shared_ptr<const ParamRecord> record;
};

/// The k finite-distance records at `depth` closest to `query`, sorted by
/// (distance, key). Records whose key equals `exclude_key` are skipped.
/// Throws CoverageError when fewer than k finite-distance records exist.
template <class Record>
std::vector<std::pair<double, std::shared_ptr<const Record>>> nearest(
    const GraphCoordinate& query, const std::vector<std::shared_ptr<const Record>>& records,
    std::size_t k, const DistanceModel& distance, std::string_view exclude_key = {}) {
  std::vector<std::pair<double, std::shared_ptr<const Record>>> found;
  for (const auto& r : records) {
    if (!exclude_key.empty() && r->key == exclude_key) continue;
    double d = distance(query, r->coordinate);
    if (std::isfinite(d)) found.emplace_back(d, r);
  }
  if (found.size() < k || k == 0) {
    throw CoverageError("only " + std::to_string(found.size()) +
                        " finite-distance records, " + std::to_string(k) + " requested");
  }
  std::partial_sort(found.begin(), found.begin() + static_cast<std::ptrdiff_t>(k), found.end(),
                    [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first < b.first;
                      return a.second->key < b.second->key;
                    });
  found.resize(k);
  return found;
}

std::vector<Neighbor> nearest_records(const GraphCoordinate& query, int depth,
                                      const ParamStore& store, std::size_t k,
                                      const DistanceModel& distance,
                                      std::string_view exclude_key = {});

}  // namespace qaccel
