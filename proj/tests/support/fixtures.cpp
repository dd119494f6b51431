#include "fixtures.hpp"

#include <atomic>
#include <fstream>
#include <numbers>
#include <sstream>

#include <unistd.h>

namespace qaccel::fx {

IsingGraph random_weighted_graph(int n, double density, std::mt19937_64& rng) {
  std::bernoulli_distribution keep(density);
  std::normal_distribution<double> weight(0.0, 1.0);
  std::uniform_int_distribution<int> node(0, n - 1);
  std::vector<Edge> edges;
  std::vector<double> weights;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (keep(rng)) {
        edges.push_back({u, v});
        weights.push_back(weight(rng));
      }
    }
  }
  if (edges.empty()) {
    edges.push_back({0, n - 1});
    weights.push_back(weight(rng));
  }
  return make_graph(n, std::move(edges), std::move(weights));
}

IsingGraph single_edge(double weight) { return make_graph(2, {{0, 1}}, {weight}); }

ParameterVector random_angles(int depth, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
  std::vector<double> v(2 * static_cast<std::size_t>(depth));
  for (auto& x : v) x = u(rng);
  return ParameterVector(std::move(v));
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("qaccel-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::filesystem::path source_dir() { return QACCEL_SOURCE_DIR; }

ScheduleSet project_schedules() { return ScheduleSet::load(source_dir() / "data/schedules.json"); }

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::trunc);
  out << text;
}

}  // namespace qaccel::fx
