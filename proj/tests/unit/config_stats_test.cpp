#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "qaccel/config.hpp"
#include "qaccel/errors.hpp"
#include "qaccel/stats.hpp"

namespace qaccel {
namespace {

// Restores an environment variable on scope exit.
class EnvGuard {
public:
  EnvGuard(const char* name, const char* value) : name_(name) {
    if (const char* old = std::getenv(name)) old_ = old;
    ::setenv(name, value, 1);
  }
  ~EnvGuard() {
    if (old_) ::setenv(name_, old_->c_str(), 1);
    else ::unsetenv(name_);
  }

private:
  const char* name_;
  std::optional<std::string> old_;
};

TEST(Config, ShippedDefaultLoads) {
  const auto c = AppConfig::load(fx::source_dir() / "config" / "default.json");
  EXPECT_EQ(c.profile.name, "hackathon");
  EXPECT_EQ(c.profile.node_count, 12);
  EXPECT_EQ(c.profile.depths, (std::vector<int>{4, 8}));
  EXPECT_EQ(c.service.port, 8080);
  EXPECT_EQ(c.service.body_limit, 1u << 20);
  EXPECT_EQ(c.service.timeout_seconds, 30.0);
  EXPECT_EQ(c.service.qubit_ceiling, 20);
  EXPECT_FALSE(c.service.daemon);
  // The shipped schedules file must be reachable from the config location.
  const auto schedules = c.load_schedules();
  EXPECT_TRUE(schedules.contains(4));
  EXPECT_TRUE(schedules.contains(8));
}

TEST(Config, RelativePathsResolveAgainstFileDirectory) {
  fx::TempDir dir("config-rel");
  fx::write_file(dir.path() / "conf.json",
                 R"({"stores_dir": "stores", "schedules": "s/sched.json",
                     "service": {"static_dir": "/abs/web"}})");
  const auto c = AppConfig::load(dir.path() / "conf.json");
  EXPECT_EQ(c.stores_dir, dir.path() / "stores");
  EXPECT_EQ(c.schedules_path, dir.path() / "s" / "sched.json");
  EXPECT_EQ(c.service.static_dir, std::filesystem::path("/abs/web"));
}

TEST(Config, EnvironmentOverridesFile) {
  fx::TempDir dir("config-env");
  fx::write_file(dir.path() / "conf.json",
                 R"({"stores_dir": "from-file", "profile": "hackathon",
                     "service": {"listen": "127.0.0.1:9000"}})");
  EnvGuard stores("QACCEL_STORES_DIR", "/env/stores");
  EnvGuard listen("QACCEL_LISTEN", "0.0.0.0:9100");
  EnvGuard profile("QACCEL_PROFILE", "small");
  auto c = AppConfig::load(dir.path() / "conf.json");
  EXPECT_EQ(c.stores_dir, dir.path() / "from-file");
  EXPECT_EQ(c.service.port, 9000);
  c.apply_environment();
  EXPECT_EQ(c.stores_dir, std::filesystem::path("/env/stores"));
  EXPECT_EQ(c.service.host, "0.0.0.0");
  EXPECT_EQ(c.service.port, 9100);
  EXPECT_EQ(c.profile.name, "small");
  EXPECT_EQ(c.profile.node_count, 8);
}

TEST(Config, JsonRoundTrip) {
  auto c = AppConfig::load(fx::source_dir() / "config" / "default.json");
  c.seed = 77;
  c.scaling.coefficient = 1.25;
  const auto back = AppConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(AppConfig::from_json(nlohmann::json::parse(R"({"service": {"listen": "nohost"}})")),
               ConfigError);
  EXPECT_THROW(AppConfig::from_json(nlohmann::json::parse(R"({"service": {"listen": "h:99999"}})")),
               ConfigError);
  EXPECT_THROW(AppConfig::from_json(nlohmann::json::parse(R"({"metric": {"bucket": 0}})")),
               ConfigError);
  EXPECT_THROW(AppConfig::from_json(nlohmann::json::parse(R"({"metric": {"mode": "mahalanobis"}})")),
               ConfigError);
  EXPECT_THROW(AppConfig::from_json(nlohmann::json::parse(R"({"seed": "one"})")), ConfigError);
  EXPECT_THROW(AppConfig::load("/nonexistent/conf.json"), ConfigError);
}

// Reference values from scipy.stats.mannwhitneyu(method="asymptotic",
// use_continuity=True).
TEST(MannWhitney, MatchesReferenceWithTies) {
  const std::vector<double> x{1.2, 3.4, 2.2, 5.1, 4.4, 3.4, 6.0, 2.9};
  const std::vector<double> y{0.5, 1.1, 2.2, 1.9, 3.0, 0.7, 2.5};
  const auto r = mann_whitney(x, y);
  EXPECT_DOUBLE_EQ(r.u, 48.5);
  EXPECT_NEAR(r.p_greater, 0.010205804056506377, 1e-12);
  EXPECT_NEAR(r.p_two_sided, 0.020411608113012753, 1e-12);
  EXPECT_GT(r.z, 0.0);
}

TEST(MannWhitney, HeavyTies) {
  const std::vector<double> a{3, 3, 3, 1, 2};
  const std::vector<double> b{3, 3, 1, 1};
  const auto r = mann_whitney(a, b);
  EXPECT_DOUBLE_EQ(r.u, 12.0);
  EXPECT_NEAR(r.p_greater, 0.34061255990412975, 1e-12);
  EXPECT_NEAR(r.p_two_sided, 0.6812251198082595, 1e-12);
}

TEST(MannWhitney, SwappingSamplesMirrorsU) {
  const std::vector<double> x{1.2, 3.4, 2.2, 5.1, 4.4, 3.4, 6.0, 2.9};
  const std::vector<double> y{0.5, 1.1, 2.2, 1.9, 3.0, 0.7, 2.5};
  const auto a = mann_whitney(x, y);
  const auto b = mann_whitney(y, x);
  EXPECT_DOUBLE_EQ(a.u + b.u, static_cast<double>(x.size() * y.size()));
  EXPECT_NEAR(a.p_two_sided, b.p_two_sided, 1e-15);
  EXPECT_GT(b.p_greater, 0.9);
}

TEST(Moments, MeanAndSampleStddev) {
  const std::vector<double> x{1.2, 3.4, 2.2, 5.1, 4.4, 3.4, 6.0, 2.9};
  EXPECT_NEAR(mean(x), 3.575, 1e-15);
  EXPECT_NEAR(stddev(x), 1.55540532154346, 1e-13);
  const std::vector<double> same{2.0, 2.0, 2.0};
  EXPECT_EQ(stddev(same), 0.0);
}

}  // namespace
}  // namespace qaccel
