#pragma once

#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qaccel {

enum class FamilyKind {
  point_mass,          // a
  discrete_uniform,    // integers a..b
  continuous_uniform,  // [a, b]
  normal,              // mean a, stddev b
};

std::string_view to_string(FamilyKind kind);
FamilyKind parse_family_kind(std::string_view name);

/// A fully parameterized edge-weight distribution.
struct WeightFamily {
  FamilyKind kind = FamilyKind::point_mass;
  double a = 0.0;
  double b = 0.0;

  static WeightFamily point_mass(double value) {
    return {FamilyKind::point_mass, value, value};
  }
  static WeightFamily discrete_uniform(double lo, double hi) {
    return {FamilyKind::discrete_uniform, lo, hi};
  }
  static WeightFamily continuous_uniform(double lo, double hi) {
    return {FamilyKind::continuous_uniform, lo, hi};
  }
  static WeightFamily normal(double mean, double stddev) {
    return {FamilyKind::normal, mean, stddev};
  }

  bool is_discrete() const noexcept {
    return kind == FamilyKind::point_mass ||
           kind == FamilyKind::discrete_uniform;
  }

  /// log P(w | f): log mass for discrete families, log density otherwise.
  /// -inf outside the support.
  double log_prob(double w) const;
  double mean() const;
  double stddev() const;
  double sample(std::mt19937_64& rng) const;

  friend bool operator==(const WeightFamily&, const WeightFamily&) = default;
};

/// Sum of log P(w_i | f). Returns -inf as soon as one weight has zero
/// probability. Throws std::invalid_argument on an empty sequence.
double log_likelihood(std::span<const double> weights, const WeightFamily& f);

/// Maximum-likelihood fit of one family to the weights, or nullopt when the
/// family cannot describe them at all (non-integers for a discrete family,
/// zero spread for a continuous one, integer-valued samples for a continuous
/// one since a density gives them probability zero).
std::optional<WeightFamily> fit_family(FamilyKind kind,
                                       std::span<const double> weights);

struct FamilyScore {
  WeightFamily family;
  double log_likelihood;
};

/// Posterior P(f | W) for each candidate under a uniform prior, normalized in
/// log space. Entries with -inf likelihood get probability 0.
std::vector<double> family_posterior(std::span<const double> weights,
                                     std::span<const WeightFamily> candidates);

/// Index of the most likely candidate; ties go to the earliest entry.
/// nullopt when every candidate scores -inf.
std::optional<std::size_t> select_family(
    std::span<const double> weights, std::span<const WeightFamily> candidates);

/// Fits every catalog family by maximum likelihood and returns the best one.
/// Throws UnrecognizedSourceError when none applies.
FamilyScore infer_family(std::span<const double> weights,
                         std::span<const FamilyKind> catalog);

/// point-mass, discrete-uniform, continuous-uniform, normal.
std::span<const FamilyKind> default_catalog();

}  // namespace qaccel
