// AVX2/FMA variants of the simulator kernels. This translation unit is the
// only one compiled with -mavx2 -mfma; nothing here may run before the
// dispatcher has confirmed CPU support.

#include <immintrin.h>

#include <cmath>

#include "qaccel/simd/kernels.hpp"

namespace qaccel::simd {

namespace {

// Three-part pi/2 (fdlibm). The leading parts carry 33 significant bits, so
// q * part is exact for |q| < 2^20.
constexpr double kPio2Hi = 1.57079632673412561417e+00;
constexpr double kPio2Mid = 6.07710050630396597660e-11;
constexpr double kPio2Lo = 2.02226624871116645580e-21;
constexpr double kTwoOverPi = 6.36619772367581382433e-01;
// Beyond this the reduction above loses accuracy; fall back to libm.
constexpr double kReductionLimit = 1.0e6;

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

// sin and cos of four angles with |x| <= kReductionLimit.
inline void sincos4(__m256d x, __m256d& sin_out, __m256d& cos_out) {
  const __m256d q = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(kTwoOverPi)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(q, _mm256_set1_pd(kPio2Hi), x);
  r = _mm256_fnmadd_pd(q, _mm256_set1_pd(kPio2Mid), r);
  r = _mm256_fnmadd_pd(q, _mm256_set1_pd(kPio2Lo), r);

  const __m256d z = _mm256_mul_pd(r, r);

  // sin(r) = r + r^3 * P(z)
  __m256d ps = _mm256_set1_pd(1.58969099521155010221e-10);
  ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(-2.50507602534068634195e-08));
  ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(2.75573137070700676789e-06));
  ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(-1.98412698298579493134e-04));
  ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(8.33333333332248946124e-03));
  ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(-1.66666666666666324348e-01));
  const __m256d sin_r = _mm256_fmadd_pd(_mm256_mul_pd(ps, z), r, r);

  // cos(r) = 1 - z/2 + z^2 * Q(z)
  __m256d pc = _mm256_set1_pd(-1.13596475577881948265e-11);
  pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(2.08757232129817482790e-09));
  pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(-2.75573143513906633035e-07));
  pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(2.48015872894767294178e-05));
  pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(-1.38888888888741095749e-03));
  pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(4.16666666666666019037e-02));
  const __m256d half_z = _mm256_mul_pd(z, _mm256_set1_pd(0.5));
  const __m256d w = _mm256_sub_pd(_mm256_set1_pd(1.0), half_z);
  const __m256d cos_r =
      _mm256_add_pd(w, _mm256_fmadd_pd(_mm256_mul_pd(z, z), pc,
                                       _mm256_sub_pd(_mm256_sub_pd(_mm256_set1_pd(1.0), w),
                                                     half_z)));

  // Quadrant selection from the low two bits of q.
  const __m256i qi = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(q));
  const __m256i one = _mm256_set1_epi64x(1);
  const __m256i two = _mm256_set1_epi64x(2);
  const __m256d swap =
      _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(qi, one), one));
  const __m256d sin_neg =
      _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(qi, two), two));
  const __m256d cos_neg = _mm256_castsi256_pd(_mm256_cmpeq_epi64(
      _mm256_and_si256(_mm256_add_epi64(qi, one), two), two));

  const __m256d sign_bit = _mm256_set1_pd(-0.0);
  __m256d s = _mm256_blendv_pd(sin_r, cos_r, swap);
  __m256d c = _mm256_blendv_pd(cos_r, sin_r, swap);
  s = _mm256_xor_pd(s, _mm256_and_pd(sin_neg, sign_bit));
  c = _mm256_xor_pd(c, _mm256_and_pd(cos_neg, sign_bit));
  sin_out = s;
  cos_out = c;
}

void phase_rotate(double* re, double* im, const double* diag, double gamma,
                  std::size_t size) {
  const __m256d g = _mm256_set1_pd(gamma);
  const __m256d limit = _mm256_set1_pd(kReductionLimit);
  const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  std::size_t i = 0;
  for (; i + 4 <= size; i += 4) {
    const __m256d angle = _mm256_mul_pd(g, _mm256_loadu_pd(diag + i));
    const __m256d too_big =
        _mm256_cmp_pd(_mm256_and_pd(angle, abs_mask), limit, _CMP_GT_OQ);
    if (_mm256_movemask_pd(too_big) != 0) {
      for (std::size_t k = i; k < i + 4; ++k) {
        double a = gamma * diag[k];
        double c = std::cos(a), s = std::sin(a);
        double r = re[k], m = im[k];
        re[k] = r * c + m * s;
        im[k] = m * c - r * s;
      }
      continue;
    }
    __m256d s, c;
    sincos4(angle, s, c);
    const __m256d r = _mm256_loadu_pd(re + i);
    const __m256d m = _mm256_loadu_pd(im + i);
    _mm256_storeu_pd(re + i, _mm256_fmadd_pd(r, c, _mm256_mul_pd(m, s)));
    _mm256_storeu_pd(im + i, _mm256_fmsub_pd(m, c, _mm256_mul_pd(r, s)));
  }
  for (; i < size; ++i) {
    double a = gamma * diag[i];
    double c = std::cos(a), s = std::sin(a);
    double r = re[i], m = im[i];
    re[i] = r * c + m * s;
    im[i] = m * c - r * s;
  }
}

// Partner of each lane for qubits 0 and 1 (pairs live inside one register).
inline __m256d partner_q0(__m256d v) { return _mm256_permute_pd(v, 0b0101); }
inline __m256d partner_q1(__m256d v) {
  return _mm256_permute4x64_pd(v, 0b01001110);
}

// With p(i) the index differing in bit q, every amplitude updates as
//   re'[i] = c re[i] + s im[p(i)],  im'[i] = c im[i] - s re[p(i)].
template <class Partner>
inline void mixer_in_register(double* re, double* im, std::size_t size,
                              __m256d c, __m256d s, Partner partner) {
  for (std::size_t i = 0; i < size; i += 4) {
    const __m256d r = _mm256_loadu_pd(re + i);
    const __m256d m = _mm256_loadu_pd(im + i);
    _mm256_storeu_pd(re + i, _mm256_fmadd_pd(c, r, _mm256_mul_pd(s, partner(m))));
    _mm256_storeu_pd(im + i, _mm256_fnmadd_pd(s, partner(r), _mm256_mul_pd(c, m)));
  }
}

void mixer_scalar_qubit(double* re, double* im, std::size_t size, unsigned q,
                        double c, double s) {
  const std::size_t stride = std::size_t{1} << q;
  for (std::size_t block = 0; block < size; block += 2 * stride) {
    for (std::size_t a = block; a < block + stride; ++a) {
      const std::size_t b = a + stride;
      double ar = re[a], ai = im[a], br = re[b], bi = im[b];
      re[a] = c * ar + s * bi;
      im[a] = c * ai - s * br;
      re[b] = c * br + s * ai;
      im[b] = c * bi - s * ar;
    }
  }
}

void mixer(double* re, double* im, unsigned qubits, double beta) {
  const double cb = std::cos(beta);
  const double sb = std::sin(beta);
  const std::size_t size = std::size_t{1} << qubits;
  if (size < 4) {
    for (unsigned q = 0; q < qubits; ++q) mixer_scalar_qubit(re, im, size, q, cb, sb);
    return;
  }
  const __m256d c = _mm256_set1_pd(cb);
  const __m256d s = _mm256_set1_pd(sb);
  for (unsigned q = 0; q < qubits; ++q) {
    if (q == 0) {
      mixer_in_register(re, im, size, c, s, partner_q0);
      continue;
    }
    if (q == 1) {
      mixer_in_register(re, im, size, c, s, partner_q1);
      continue;
    }
    const std::size_t stride = std::size_t{1} << q;
    for (std::size_t block = 0; block < size; block += 2 * stride) {
      for (std::size_t a = block; a < block + stride; a += 4) {
        const std::size_t b = a + stride;
        const __m256d ar = _mm256_loadu_pd(re + a);
        const __m256d ai = _mm256_loadu_pd(im + a);
        const __m256d br = _mm256_loadu_pd(re + b);
        const __m256d bi = _mm256_loadu_pd(im + b);
        _mm256_storeu_pd(re + a, _mm256_fmadd_pd(c, ar, _mm256_mul_pd(s, bi)));
        _mm256_storeu_pd(im + a, _mm256_fnmadd_pd(s, br, _mm256_mul_pd(c, ai)));
        _mm256_storeu_pd(re + b, _mm256_fmadd_pd(c, br, _mm256_mul_pd(s, ai)));
        _mm256_storeu_pd(im + b, _mm256_fnmadd_pd(s, ar, _mm256_mul_pd(c, bi)));
      }
    }
  }
}

double expectation(const double* re, const double* im, const double* diag,
                   std::size_t size) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= size; i += 4) {
    const __m256d r = _mm256_loadu_pd(re + i);
    const __m256d m = _mm256_loadu_pd(im + i);
    const __m256d p = _mm256_fmadd_pd(r, r, _mm256_mul_pd(m, m));
    acc = _mm256_fmadd_pd(p, _mm256_loadu_pd(diag + i), acc);
  }
  double total = hsum(acc);
  for (; i < size; ++i) total += (re[i] * re[i] + im[i] * im[i]) * diag[i];
  return total;
}

double norm_squared(const double* re, const double* im, std::size_t size) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= size; i += 4) {
    const __m256d r = _mm256_loadu_pd(re + i);
    const __m256d m = _mm256_loadu_pd(im + i);
    acc = _mm256_fmadd_pd(r, r, _mm256_fmadd_pd(m, m, acc));
  }
  double total = hsum(acc);
  for (; i < size; ++i) total += re[i] * re[i] + im[i] * im[i];
  return total;
}

double diag_cross(const double* lre, const double* lim, const double* rre,
                  const double* rim, const double* diag, std::size_t size) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= size; i += 4) {
    const __m256d t = _mm256_fmsub_pd(_mm256_loadu_pd(lre + i), _mm256_loadu_pd(rim + i),
                                      _mm256_mul_pd(_mm256_loadu_pd(lim + i),
                                                    _mm256_loadu_pd(rre + i)));
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(diag + i), t, acc);
  }
  double total = hsum(acc);
  for (; i < size; ++i) total += diag[i] * (lre[i] * rim[i] - lim[i] * rre[i]);
  return total;
}

// Im <l| X_q |r> = sum_i lre[i] rim[p(i)] - lim[i] rre[p(i)].
template <class Partner>
inline __m256d cross_in_register(const double* lre, const double* lim,
                                 const double* rre, const double* rim,
                                 std::size_t size, Partner partner, __m256d acc) {
  for (std::size_t i = 0; i < size; i += 4) {
    const __m256d pr = partner(_mm256_loadu_pd(rre + i));
    const __m256d pm = partner(_mm256_loadu_pd(rim + i));
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(lre + i), pm, acc);
    acc = _mm256_fnmadd_pd(_mm256_loadu_pd(lim + i), pr, acc);
  }
  return acc;
}

double mixer_cross(const double* lre, const double* lim, const double* rre,
                   const double* rim, unsigned qubits) {
  const std::size_t size = std::size_t{1} << qubits;
  if (size < 4) return scalar_kernels().mixer_cross(lre, lim, rre, rim, qubits);
  __m256d acc = _mm256_setzero_pd();
  for (unsigned q = 0; q < qubits; ++q) {
    if (q == 0) {
      acc = cross_in_register(lre, lim, rre, rim, size, partner_q0, acc);
      continue;
    }
    if (q == 1) {
      acc = cross_in_register(lre, lim, rre, rim, size, partner_q1, acc);
      continue;
    }
    const std::size_t stride = std::size_t{1} << q;
    for (std::size_t block = 0; block < size; block += 2 * stride) {
      for (std::size_t a = block; a < block + stride; a += 4) {
        const std::size_t b = a + stride;
        const __m256d lar = _mm256_loadu_pd(lre + a), lai = _mm256_loadu_pd(lim + a);
        const __m256d lbr = _mm256_loadu_pd(lre + b), lbi = _mm256_loadu_pd(lim + b);
        const __m256d rar = _mm256_loadu_pd(rre + a), rai = _mm256_loadu_pd(rim + a);
        const __m256d rbr = _mm256_loadu_pd(rre + b), rbi = _mm256_loadu_pd(rim + b);
        acc = _mm256_fmadd_pd(lar, rbi, acc);
        acc = _mm256_fnmadd_pd(lai, rbr, acc);
        acc = _mm256_fmadd_pd(lbr, rai, acc);
        acc = _mm256_fnmadd_pd(lbi, rar, acc);
      }
    }
  }
  return hsum(acc);
}

constexpr KernelTable kAvx2{
    "avx2",       phase_rotate, mixer,     expectation,
    norm_squared, diag_cross,   mixer_cross};

}  // namespace

namespace detail {
const KernelTable* avx2_table_if_compiled() { return &kAvx2; }
}  // namespace detail

}  // namespace qaccel::simd
