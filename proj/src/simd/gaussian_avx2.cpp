// Built with -mavx2 -mfma. Only reached after a runtime CPU check.

#include "currents/simd/gaussian.hpp"

#include <immintrin.h>

#include <cmath>
#include <cstdint>

namespace currents::simd {
namespace {

// exp(x) for x <= 0. Cody-Waite reduction x = n ln2 + r, |r| <= ln2/2, then a
// degree-13 Taylor polynomial (truncation < 1e-17) and exponent-field scaling.
// Results that would be subnormal are flushed to zero.
inline __m256d exp_nonpositive(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634);
  const __m256d ln2_hi = _mm256_set1_pd(0.6931471805599453);
  const __m256d ln2_lo = _mm256_set1_pd(2.3190468138462996e-17);
  const __m256d underflow = _mm256_set1_pd(-708.0);

  const __m256d flush = _mm256_cmp_pd(x, underflow, _CMP_LT_OQ);
  x = _mm256_max_pd(x, underflow);

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);

  static constexpr double kCoef[] = {
      1.0 / 6227020800.0,  // 1/13!
      1.0 / 479001600.0,   1.0 / 39916800.0, 1.0 / 3628800.0, 1.0 / 362880.0,
      1.0 / 40320.0,       1.0 / 5040.0,     1.0 / 720.0,     1.0 / 120.0,
      1.0 / 24.0,          1.0 / 6.0,        0.5,             1.0,
      1.0};
  __m256d p = _mm256_set1_pd(kCoef[0]);
  for (int i = 1; i < 14; ++i) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kCoef[i]));

  const __m128i n32 = _mm256_cvtpd_epi32(n);
  __m256i bits = _mm256_cvtepi32_epi64(n32);
  bits = _mm256_add_epi64(bits, _mm256_set1_epi64x(1023));
  bits = _mm256_slli_epi64(bits, 52);
  const __m256d scaled = _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
  return _mm256_andnot_pd(flush, scaled);
}

inline __m256i tail_mask(std::size_t remaining) {
  const __m256i lane = _mm256_set_epi64x(3, 2, 1, 0);
  return _mm256_cmpgt_epi64(_mm256_set1_epi64x(static_cast<long long>(remaining)), lane);
}

inline __m256d neg_scaled_sq_dist(const SoaView& points, std::span<const double> y,
                                  std::size_t j, __m256d neg_inv, const __m256i* mask) {
  __m256d d2 = _mm256_setzero_pd();
  for (int a = 0; a < points.dim; ++a) {
    const __m256d xa = mask ? _mm256_maskload_pd(points.axis[a] + j, *mask)
                            : _mm256_loadu_pd(points.axis[a] + j);
    const __m256d d = _mm256_sub_pd(xa, _mm256_set1_pd(y[a]));
    d2 = _mm256_fmadd_pd(d, d, d2);
  }
  return _mm256_mul_pd(d2, neg_inv);
}

void gaussian_row_avx2(const SoaView& points, std::span<const double> y,
                       double inv_lambda_sq, std::span<double> out) {
  const __m256d neg_inv = _mm256_set1_pd(-inv_lambda_sq);
  std::size_t j = 0;
  for (; j + 4 <= points.count; j += 4) {
    _mm256_storeu_pd(out.data() + j,
                     exp_nonpositive(neg_scaled_sq_dist(points, y, j, neg_inv, nullptr)));
  }
  if (j < points.count) {
    const __m256i mask = tail_mask(points.count - j);
    _mm256_maskstore_pd(out.data() + j, mask,
                        exp_nonpositive(neg_scaled_sq_dist(points, y, j, neg_inv, &mask)));
  }
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void gaussian_field_avx2(const SoaView& points, const SoaView& weights,
                         std::span<const double> y, double inv_lambda_sq,
                         std::span<double> out) {
  const __m256d neg_inv = _mm256_set1_pd(-inv_lambda_sq);
  __m256d acc[kMaxDim] = {_mm256_setzero_pd(), _mm256_setzero_pd(), _mm256_setzero_pd()};
  std::size_t j = 0;
  for (; j + 4 <= points.count; j += 4) {
    const __m256d k = exp_nonpositive(neg_scaled_sq_dist(points, y, j, neg_inv, nullptr));
    for (int a = 0; a < weights.dim; ++a)
      acc[a] = _mm256_fmadd_pd(k, _mm256_loadu_pd(weights.axis[a] + j), acc[a]);
  }
  if (j < points.count) {
    const __m256i mask = tail_mask(points.count - j);
    const __m256d k = exp_nonpositive(neg_scaled_sq_dist(points, y, j, neg_inv, &mask));
    for (int a = 0; a < weights.dim; ++a)
      acc[a] = _mm256_fmadd_pd(k, _mm256_maskload_pd(weights.axis[a] + j, mask), acc[a]);
  }
  for (int a = 0; a < weights.dim; ++a) out[a] = hsum(acc[a]);
}

}  // namespace

namespace detail {
const KernelTable& avx2_table() {
  static const KernelTable table{Isa::avx2, "avx2", &gaussian_row_avx2, &gaussian_field_avx2};
  return table;
}
}  // namespace detail

}  // namespace currents::simd
