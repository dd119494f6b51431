#include "qaccel/weight_family.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "qaccel/errors.hpp"

namespace qaccel {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool is_integer(double w) { return std::isfinite(w) && w == std::floor(w); }

constexpr std::array<FamilyKind, 4> kDefaultCatalog{
    FamilyKind::point_mass, FamilyKind::discrete_uniform,
    FamilyKind::continuous_uniform, FamilyKind::normal};

}  // namespace

std::string_view to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::point_mass:
      return "point-mass";
    case FamilyKind::discrete_uniform:
      return "discrete-uniform";
    case FamilyKind::continuous_uniform:
      return "continuous-uniform";
    case FamilyKind::normal:
      return "normal";
  }
  return "unknown";
}

FamilyKind parse_family_kind(std::string_view name) {
  for (FamilyKind k : kDefaultCatalog) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown weight family '" + std::string(name) +
                              "'");
}

double WeightFamily::log_prob(double w) const {
  switch (kind) {
    case FamilyKind::point_mass:
      return w == a ? 0.0 : kNegInf;
    case FamilyKind::discrete_uniform:
      if (!is_integer(w) || w < a || w > b) return kNegInf;
      return -std::log(b - a + 1.0);
    case FamilyKind::continuous_uniform:
      if (!(b > a) || w < a || w > b) return kNegInf;
      return -std::log(b - a);
    case FamilyKind::normal: {
      if (!(b > 0.0)) return kNegInf;
      double z = (w - a) / b;
      return -0.5 * z * z - std::log(b) - 0.5 * std::log(2.0 * std::numbers::pi);
    }
  }
  return kNegInf;
}

double WeightFamily::mean() const {
  switch (kind) {
    case FamilyKind::point_mass:
      return a;
    case FamilyKind::discrete_uniform:
    case FamilyKind::continuous_uniform:
      return 0.5 * (a + b);
    case FamilyKind::normal:
      return a;
  }
  return 0.0;
}

double WeightFamily::stddev() const {
  switch (kind) {
    case FamilyKind::point_mass:
      return 0.0;
    case FamilyKind::discrete_uniform: {
      double count = b - a + 1.0;
      return std::sqrt((count * count - 1.0) / 12.0);
    }
    case FamilyKind::continuous_uniform:
      return (b - a) / std::sqrt(12.0);
    case FamilyKind::normal:
      return b;
  }
  return 0.0;
}

double WeightFamily::sample(std::mt19937_64& rng) const {
  switch (kind) {
    case FamilyKind::point_mass:
      return a;
    case FamilyKind::discrete_uniform: {
      std::uniform_int_distribution<long long> d(static_cast<long long>(a),
                                                 static_cast<long long>(b));
      return static_cast<double>(d(rng));
    }
    case FamilyKind::continuous_uniform: {
      std::uniform_real_distribution<double> d(a, b);
      return d(rng);
    }
    case FamilyKind::normal: {
      std::normal_distribution<double> d(a, b);
      return d(rng);
    }
  }
  return a;
}

double log_likelihood(std::span<const double> weights, const WeightFamily& f) {
  if (weights.empty()) {
    throw std::invalid_argument("log_likelihood of an empty weight sequence");
  }
  double total = 0.0;
  for (double w : weights) {
    double lp = f.log_prob(w);
    if (lp == kNegInf) return kNegInf;
    total += lp;
  }
  return total;
}

std::optional<WeightFamily> fit_family(FamilyKind kind,
                                       std::span<const double> weights) {
  if (weights.empty()) return std::nullopt;
  auto [lo_it, hi_it] = std::minmax_element(weights.begin(), weights.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const bool all_integer = std::all_of(weights.begin(), weights.end(), is_integer);

  switch (kind) {
    case FamilyKind::point_mass:
      if (lo != hi) return std::nullopt;
      return WeightFamily::point_mass(lo);
    case FamilyKind::discrete_uniform:
      if (!all_integer) return std::nullopt;
      return WeightFamily::discrete_uniform(lo, hi);
    case FamilyKind::continuous_uniform:
      if (all_integer || !(hi > lo)) return std::nullopt;
      return WeightFamily::continuous_uniform(lo, hi);
    case FamilyKind::normal: {
      if (all_integer || !(hi > lo)) return std::nullopt;
      double n = static_cast<double>(weights.size());
      double mean = 0.0;
      for (double w : weights) mean += w;
      mean /= n;
      double var = 0.0;
      for (double w : weights) var += (w - mean) * (w - mean);
      var /= n;
      if (!(var > 0.0)) return std::nullopt;
      return WeightFamily::normal(mean, std::sqrt(var));
    }
  }
  return std::nullopt;
}

std::vector<double> family_posterior(std::span<const double> weights,
                                     std::span<const WeightFamily> candidates) {
  std::vector<double> logs;
  logs.reserve(candidates.size());
  double best = kNegInf;
  for (const auto& f : candidates) {
    // The uniform prior P(f) and the evidence P(W) cancel in normalization.
    double ll = log_likelihood(weights, f);
    logs.push_back(ll);
    best = std::max(best, ll);
  }
  std::vector<double> post(candidates.size(), 0.0);
  if (best == kNegInf) return post;
  double z = 0.0;
  for (double ll : logs) z += ll == kNegInf ? 0.0 : std::exp(ll - best);
  for (std::size_t i = 0; i < logs.size(); ++i) {
    post[i] = logs[i] == kNegInf ? 0.0 : std::exp(logs[i] - best) / z;
  }
  return post;
}

std::optional<std::size_t> select_family(
    std::span<const double> weights, std::span<const WeightFamily> candidates) {
  std::optional<std::size_t> best;
  double best_ll = kNegInf;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    double ll = log_likelihood(weights, candidates[i]);
    if (ll > best_ll) {
      best_ll = ll;
      best = i;
    }
  }
  return best;
}

FamilyScore infer_family(std::span<const double> weights,
                         std::span<const FamilyKind> catalog) {
  if (catalog.empty()) {
    throw std::invalid_argument("weight family catalog is empty");
  }
  std::vector<WeightFamily> fitted;
  for (FamilyKind kind : catalog) {
    if (auto f = fit_family(kind, weights)) fitted.push_back(*f);
  }
  auto best = select_family(weights, fitted);
  if (!best) {
    throw UnrecognizedSourceError(
        "no weight family in the catalog explains the edge weights");
  }
  return {fitted[*best], log_likelihood(weights, fitted[*best])};
}

std::span<const FamilyKind> default_catalog() { return kDefaultCatalog; }

}  // namespace qaccel
