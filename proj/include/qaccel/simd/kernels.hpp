#pragma once

// Data-parallel inner loops of the statevector simulator.
//
// Amplitudes are stored split (real and imaginary parts in separate arrays of
// length 2^n). Every kernel has a portable scalar reference implementation;
// an AVX2/FMA variant is compiled on x86-64 and chosen at runtime when the CPU
// supports it. The environment variable QACCEL_SIMD=scalar forces the
// reference kernels.

#include <cstddef>
#include <string_view>

namespace qaccel::simd {

struct KernelTable {
  std::string_view name;

  /// amp[i] *= exp(-i * gamma * diag[i]).
  void (*phase_rotate)(double* re, double* im, const double* diag,
                       double gamma, std::size_t size);

  /// Applies exp(-i beta X_q) to every qubit q < qubits.
  void (*mixer)(double* re, double* im, unsigned qubits, double beta);

  /// sum_i |amp[i]|^2 * diag[i].
  double (*expectation)(const double* re, const double* im, const double* diag,
                        std::size_t size);

  /// sum_i |amp[i]|^2.
  double (*norm_squared)(const double* re, const double* im, std::size_t size);

  /// Im <lhs| D |rhs> for the diagonal operator D.
  double (*diag_cross)(const double* lre, const double* lim, const double* rre,
                       const double* rim, const double* diag, std::size_t size);

  /// Im <lhs| sum_q X_q |rhs>.
  double (*mixer_cross)(const double* lre, const double* lim, const double* rre,
                        const double* rim, unsigned qubits);
};

const KernelTable& scalar_kernels();

/// nullptr when the AVX2 variant was not compiled in or the CPU lacks
/// AVX2/FMA.
const KernelTable* avx2_kernels();

/// The table used by default: AVX2 when available unless QACCEL_SIMD=scalar.
const KernelTable& active_kernels();

namespace detail {
const KernelTable* avx2_table_if_compiled();
}

}  // namespace qaccel::simd
