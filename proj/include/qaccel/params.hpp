#pragma once

#include <span>
#include <vector>

#include <json.hpp>

namespace qaccel {

/// Interleaved QAOA angles: gamma_l at index 2l, beta_l at index 2l+1
/// (radians), for layers l = 0..depth-1.
class ParameterVector {
public:
  ParameterVector() = default;
  /// Throws std::invalid_argument unless values.size() is a positive even
  /// number and every value is finite.
  explicit ParameterVector(std::vector<double> values);
  static ParameterVector zeros(int depth);
  static ParameterVector from_layers(std::span<const double> gammas,
                                     std::span<const double> betas);

  int depth() const noexcept { return static_cast<int>(values_.size() / 2); }
  std::size_t size() const noexcept { return values_.size(); }
  double gamma(int layer) const { return values_[2 * layer]; }
  double beta(int layer) const { return values_[2 * layer + 1]; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const ParameterVector&, const ParameterVector&) = default;

private:
  std::vector<double> values_;
};

/// Maps the angles onto a representative of their symmetry class without
/// changing the score: every beta is wrapped into (-pi/2, pi/2] (the mixer
/// has period pi) and, if the first gamma is negative, all angles are negated
/// (time reversal conjugates the state, leaving a real diagonal observable's
/// expectation unchanged).
ParameterVector canonical_gauge(const ParameterVector& p);

nlohmann::json to_json(const ParameterVector& p);
ParameterVector params_from_json(const nlohmann::json& j);

}  // namespace qaccel
