#include "qaccel/params.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qaccel {

ParameterVector::ParameterVector(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.empty() || values_.size() % 2 != 0) {
    throw std::invalid_argument("parameter vector length must be 2p with p >= 1, got " +
                                std::to_string(values_.size()));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("parameter vector contains a non-finite value");
    }
  }
}

ParameterVector ParameterVector::zeros(int depth) {
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  return ParameterVector(std::vector<double>(2 * static_cast<std::size_t>(depth), 0.0));
}

ParameterVector ParameterVector::from_layers(std::span<const double> gammas,
                                             std::span<const double> betas) {
  if (gammas.size() != betas.size()) {
    throw std::invalid_argument("gamma and beta schedules differ in length");
  }
  std::vector<double> v;
  v.reserve(2 * gammas.size());
  for (std::size_t l = 0; l < gammas.size(); ++l) {
    v.push_back(gammas[l]);
    v.push_back(betas[l]);
  }
  return ParameterVector(std::move(v));
}

ParameterVector canonical_gauge(const ParameterVector& p) {
  constexpr double pi = std::numbers::pi;
  std::vector<double> v(p.values().begin(), p.values().end());
  auto wrap_beta = [&] {
    for (std::size_t i = 1; i < v.size(); i += 2) {
      double b = std::remainder(v[i], pi);  // [-pi/2, pi/2]
      if (b <= -pi / 2) b += pi;
      v[i] = b;
    }
  };
  wrap_beta();
  if (v[0] < 0.0) {
    for (double& x : v) x = -x;
    wrap_beta();
  }
  return ParameterVector(std::move(v));
}

nlohmann::json to_json(const ParameterVector& p) {
  return nlohmann::json(std::vector<double>(p.values().begin(), p.values().end()));
}

ParameterVector params_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("parameters must be a JSON array");
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) throw std::invalid_argument("parameters must be numbers");
    v.push_back(x.get<double>());
  }
  return ParameterVector(std::move(v));
}

}  // namespace qaccel
