#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "qaccel/databank.hpp"
#include "qaccel/generators.hpp"
#include "qaccel/graph.hpp"
#include "qaccel/params.hpp"

namespace qaccel::fx {

/// Graph on n nodes with each pair present with probability `density` and
/// normal(0,1) weights; at least one edge.
IsingGraph random_weighted_graph(int n, double density, std::mt19937_64& rng);

IsingGraph single_edge(double weight = 1.0);

/// Uniform random angles in [-pi, pi].
ParameterVector random_angles(int depth, std::mt19937_64& rng);

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }

private:
  std::filesystem::path path_;
};

std::filesystem::path source_dir();
ScheduleSet project_schedules();

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& text);

}  // namespace qaccel::fx
