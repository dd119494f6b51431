#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "qaccel/graph.hpp"
#include "qaccel/params.hpp"
#include "qaccel/simd/kernels.hpp"

namespace qaccel {

/// Dense statevector, split storage.
struct QuantumState {
  unsigned qubits = 0;
  std::vector<double> re;
  std::vector<double> im;

  std::size_t size() const noexcept { return re.size(); }
  std::complex<double> amplitude(std::size_t i) const { return {re[i], im[i]}; }
  double norm_squared() const;
};

inline constexpr int kDefaultQubitCeiling = 20;

/// Cost-unit charge of one score_and_gradient call, relative to one score
/// call. Used for optimizer budget accounting.
inline constexpr int kGradientCost = 4;

/// Evaluates QAOA circuits for one fixed graph.
///
/// Construction precomputes the cost diagonal H_C(z) = sum_e c_e z_u z_v over
/// all 2^n basis states; each layer then costs one diagonal pass and n mixer
/// butterfly passes. The score convention is score = -<psi|H_C|psi>, so
/// higher is better. All member functions are const and reentrant.
class QaoaEvaluator {
public:
  explicit QaoaEvaluator(const IsingGraph& graph,
                         int qubit_ceiling = kDefaultQubitCeiling,
                         const simd::KernelTable& kernels = simd::active_kernels());

  using LayerObserver = std::function<void(int layer, const QuantumState&)>;

  QuantumState simulate(const ParameterVector& params,
                        const LayerObserver& observer = {}) const;
  double score(const ParameterVector& params) const;

  struct ScoreGradient {
    double score = 0.0;
    std::vector<double> gradient;
  };
  /// Exact gradient by reverse-mode (adjoint) differentiation of the circuit.
  ScoreGradient score_and_gradient(const ParameterVector& params) const;

  unsigned qubits() const noexcept { return qubits_; }
  std::span<const double> cost_diagonal() const noexcept { return diag_; }
  /// sum_e |c_e|, an upper bound on |score|.
  double weight_l1() const noexcept { return weight_l1_; }
  const simd::KernelTable& kernels() const noexcept { return *kernels_; }

private:
  void forward(QuantumState& state, const ParameterVector& params,
               const LayerObserver* observer) const;

  unsigned qubits_;
  std::vector<double> diag_;
  double weight_l1_ = 0.0;
  const simd::KernelTable* kernels_;
};

// Free-function conveniences that build a QaoaEvaluator per call.
QuantumState simulate(const IsingGraph& g, const ParameterVector& params);
double score(const IsingGraph& g, const ParameterVector& params);
std::vector<double> gradient(const IsingGraph& g, const ParameterVector& params);

}  // namespace qaccel
