#include <cmath>

#include "qaccel/simd/kernels.hpp"

namespace qaccel::simd {

namespace {

void phase_rotate(double* re, double* im, const double* diag, double gamma,
                  std::size_t size) {
  for (std::size_t i = 0; i < size; ++i) {
    double angle = gamma * diag[i];
    double c = std::cos(angle);
    double s = std::sin(angle);
    double r = re[i];
    double m = im[i];
    // (r + i m)(c - i s)
    re[i] = r * c + m * s;
    im[i] = m * c - r * s;
  }
}

void mixer(double* re, double* im, unsigned qubits, double beta) {
  const double c = std::cos(beta);
  const double s = std::sin(beta);
  const std::size_t size = std::size_t{1} << qubits;
  for (unsigned q = 0; q < qubits; ++q) {
    const std::size_t stride = std::size_t{1} << q;
    for (std::size_t block = 0; block < size; block += 2 * stride) {
      for (std::size_t a = block; a < block + stride; ++a) {
        const std::size_t b = a + stride;
        double ar = re[a], ai = im[a], br = re[b], bi = im[b];
        // [c, -is; -is, c]
        re[a] = c * ar + s * bi;
        im[a] = c * ai - s * br;
        re[b] = c * br + s * ai;
        im[b] = c * bi - s * ar;
      }
    }
  }
}

double expectation(const double* re, const double* im, const double* diag,
                   std::size_t size) {
  double acc = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    acc += (re[i] * re[i] + im[i] * im[i]) * diag[i];
  }
  return acc;
}

double norm_squared(const double* re, const double* im, std::size_t size) {
  double acc = 0.0;
  for (std::size_t i = 0; i < size; ++i) acc += re[i] * re[i] + im[i] * im[i];
  return acc;
}

double diag_cross(const double* lre, const double* lim, const double* rre,
                  const double* rim, const double* diag, std::size_t size) {
  double acc = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    acc += diag[i] * (lre[i] * rim[i] - lim[i] * rre[i]);
  }
  return acc;
}

double mixer_cross(const double* lre, const double* lim, const double* rre,
                   const double* rim, unsigned qubits) {
  const std::size_t size = std::size_t{1} << qubits;
  double acc = 0.0;
  for (unsigned q = 0; q < qubits; ++q) {
    const std::size_t stride = std::size_t{1} << q;
    for (std::size_t block = 0; block < size; block += 2 * stride) {
      for (std::size_t a = block; a < block + stride; ++a) {
        const std::size_t b = a + stride;
        acc += lre[a] * rim[b] - lim[a] * rre[b];
        acc += lre[b] * rim[a] - lim[b] * rre[a];
      }
    }
  }
  return acc;
}

constexpr KernelTable kScalar{
    "scalar",     phase_rotate, mixer,     expectation,
    norm_squared, diag_cross,   mixer_cross};

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

}  // namespace qaccel::simd
