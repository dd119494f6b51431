#include "qaccel/engine.hpp"

#include <cmath>
#include <string>

#include "qaccel/errors.hpp"

namespace qaccel {

double QuantumState::norm_squared() const {
  return simd::scalar_kernels().norm_squared(re.data(), im.data(), size());
}

QaoaEvaluator::QaoaEvaluator(const IsingGraph& graph, int qubit_ceiling,
                             const simd::KernelTable& kernels)
    : qubits_(static_cast<unsigned>(graph.node_count())), kernels_(&kernels) {
  if (graph.node_count() > qubit_ceiling) {
    throw EngineError("graph has " + std::to_string(graph.node_count()) +
                      " nodes, above the qubit ceiling of " +
                      std::to_string(qubit_ceiling));
  }
  const std::size_t size = std::size_t{1} << qubits_;
  diag_.assign(size, 0.0);
  const auto edges = graph.edges();
  const auto weights = graph.weights();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const std::size_t mask =
        (std::size_t{1} << edges[e].u) | (std::size_t{1} << edges[e].v);
    const double w = weights[e];
    weight_l1_ += std::abs(w);
    // z_u z_v = +1 when the two bits agree.
    for (std::size_t i = 0; i < size; ++i) {
      const std::size_t bits = i & mask;
      diag_[i] += (bits == 0 || bits == mask) ? w : -w;
    }
  }
}

void QaoaEvaluator::forward(QuantumState& state, const ParameterVector& params,
                            const LayerObserver* observer) const {
  const std::size_t size = diag_.size();
  state.qubits = qubits_;
  const double amp = 1.0 / std::sqrt(static_cast<double>(size));
  state.re.assign(size, amp);
  state.im.assign(size, 0.0);
  for (int l = 0; l < params.depth(); ++l) {
    kernels_->phase_rotate(state.re.data(), state.im.data(), diag_.data(),
                           params.gamma(l), size);
    kernels_->mixer(state.re.data(), state.im.data(), qubits_, params.beta(l));
    if (observer != nullptr && *observer) (*observer)(l, state);
  }
}

QuantumState QaoaEvaluator::simulate(const ParameterVector& params,
                                     const LayerObserver& observer) const {
  QuantumState state;
  forward(state, params, &observer);
  return state;
}

double QaoaEvaluator::score(const ParameterVector& params) const {
  QuantumState state;
  forward(state, params, nullptr);
  return -kernels_->expectation(state.re.data(), state.im.data(), diag_.data(),
                                diag_.size());
}

QaoaEvaluator::ScoreGradient QaoaEvaluator::score_and_gradient(
    const ParameterVector& params) const {
  const std::size_t size = diag_.size();
  QuantumState psi;
  forward(psi, params, nullptr);

  ScoreGradient out;
  out.score = -kernels_->expectation(psi.re.data(), psi.im.data(), diag_.data(), size);
  out.gradient.assign(params.size(), 0.0);

  // lambda = H_C psi, then walk the circuit backwards. For a gate
  // exp(-i theta G), dE/dtheta = 2 Im <lambda|G|psi> with both vectors taken
  // just after the gate.
  std::vector<double> lre(size), lim(size);
  for (std::size_t i = 0; i < size; ++i) {
    lre[i] = diag_[i] * psi.re[i];
    lim[i] = diag_[i] * psi.im[i];
  }
  for (int l = params.depth() - 1; l >= 0; --l) {
    const double d_beta = 2.0 * kernels_->mixer_cross(lre.data(), lim.data(),
                                                      psi.re.data(), psi.im.data(),
                                                      qubits_);
    kernels_->mixer(psi.re.data(), psi.im.data(), qubits_, -params.beta(l));
    kernels_->mixer(lre.data(), lim.data(), qubits_, -params.beta(l));

    const double d_gamma =
        2.0 * kernels_->diag_cross(lre.data(), lim.data(), psi.re.data(),
                                   psi.im.data(), diag_.data(), size);
    kernels_->phase_rotate(psi.re.data(), psi.im.data(), diag_.data(),
                           -params.gamma(l), size);
    kernels_->phase_rotate(lre.data(), lim.data(), diag_.data(), -params.gamma(l),
                           size);

    out.gradient[2 * l] = -d_gamma;
    out.gradient[2 * l + 1] = -d_beta;
  }
  return out;
}

QuantumState simulate(const IsingGraph& g, const ParameterVector& params) {
  return QaoaEvaluator(g).simulate(params);
}

double score(const IsingGraph& g, const ParameterVector& params) {
  return QaoaEvaluator(g).score(params);
}

std::vector<double> gradient(const IsingGraph& g, const ParameterVector& params) {
  return QaoaEvaluator(g).score_and_gradient(params).gradient;
}

}  // namespace qaccel
