#include <immintrin.h>

#include <cmath>
#include <cstdint>
#include <limits>

#include "gevprice/kernels.hpp"
#include "kernels_internal.hpp"

namespace gevprice::kernels {
namespace {

// exp(x) on four lanes. Cody-Waite reduction x = n ln2 + r with |r| <= ln2/2,
// Taylor polynomial of degree 13 for e^r, then scaling by 2^n split in two
// halves so that subnormal results and n = 1024 stay representable.
inline __m256d exp4(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
  const __m256d lo_cut = _mm256_set1_pd(-745.2);
  const __m256d hi_cut = _mm256_set1_pd(709.78);

  __m256d under = _mm256_cmp_pd(x, lo_cut, _CMP_LT_OQ);
  __m256d over = _mm256_cmp_pd(x, hi_cut, _CMP_GT_OQ);
  __m256d xc = _mm256_min_pd(_mm256_max_pd(x, lo_cut), hi_cut);

  __m256d n = _mm256_round_pd(_mm256_mul_pd(xc, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, xc);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);

  static constexpr double c[14] = {
      1.0,
      1.0,
      1.0 / 2,
      1.0 / 6,
      1.0 / 24,
      1.0 / 120,
      1.0 / 720,
      1.0 / 5040,
      1.0 / 40320,
      1.0 / 362880,
      1.0 / 3628800,
      1.0 / 39916800,
      1.0 / 479001600,
      1.0 / 6227020800.0,
  };
  __m256d p = _mm256_set1_pd(c[13]);
  for (int k = 12; k >= 0; --k) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(c[k]));

  // Split 2^n = 2^h1 * 2^h2 so both halves stay inside the normal exponent range.
  __m256d h1 = _mm256_floor_pd(_mm256_mul_pd(n, _mm256_set1_pd(0.5)));
  __m256d h2 = _mm256_sub_pd(n, h1);
  // k is integral with |k| < 2^31, so adding 1.5 * 2^52 leaves it in the low mantissa bits.
  auto pow2 = [](__m256d k) {
    const __m256d m = _mm256_set1_pd(6755399441055744.0);
    __m256i ki = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(k, m)), _mm256_castpd_si256(m));
    ki = _mm256_add_epi64(ki, _mm256_set1_epi64x(1023));
    return _mm256_castsi256_pd(_mm256_slli_epi64(ki, 52));
  };
  __m256d res = _mm256_mul_pd(_mm256_mul_pd(p, pow2(h1)), pow2(h2));
  res = _mm256_blendv_pd(res, _mm256_setzero_pd(), under);
  res = _mm256_blendv_pd(res, _mm256_set1_pd(std::numeric_limits<double>::infinity()), over);
  // NaN lanes propagate.
  __m256d nan_mask = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
  return _mm256_blendv_pd(res, x, nan_mask);
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_max_sd(lo, sh));
}

double max_value(std::span<const double> v) {
  const std::size_t n = v.size();
  std::size_t i = 0;
  double m = -std::numeric_limits<double>::infinity();
  if (n >= 4) {
    __m256d acc = _mm256_set1_pd(m);
    for (; i + 4 <= n; i += 4) acc = _mm256_max_pd(acc, _mm256_loadu_pd(v.data() + i));
    m = hmax(acc);
  }
  for (; i < n; ++i) m = v[i] > m ? v[i] : m;
  return m;
}

double sum_exp_shifted(std::span<const double> v, double shift) {
  const std::size_t n = v.size();
  std::size_t i = 0;
  __m256d acc = _mm256_setzero_pd();
  const __m256d s = _mm256_set1_pd(shift);
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, exp4(_mm256_sub_pd(_mm256_loadu_pd(v.data() + i), s)));
  double total = hsum(acc);
  for (; i < n; ++i) total += std::exp(v[i] - shift);
  return total;
}

void exp_shifted(std::span<const double> v, double shift, std::span<double> out) {
  const std::size_t n = v.size();
  std::size_t i = 0;
  const __m256d s = _mm256_set1_pd(shift);
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out.data() + i, exp4(_mm256_sub_pd(_mm256_loadu_pd(v.data() + i), s)));
  for (; i < n; ++i) out[i] = std::exp(v[i] - shift);
}

void scale_offset(std::span<const double> v, std::span<const double> offset, double scale,
                  std::span<double> out) {
  const std::size_t n = v.size();
  std::size_t i = 0;
  const __m256d sc = _mm256_set1_pd(scale);
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_add_pd(_mm256_loadu_pd(v.data() + i), _mm256_loadu_pd(offset.data() + i));
    _mm256_storeu_pd(out.data() + i, _mm256_mul_pd(sc, t));
  }
  for (; i < n; ++i) out[i] = scale * (v[i] + offset[i]);
}

void affine_utility(std::span<const double> a, std::span<const double> b,
                    std::span<const double> x, std::span<double> out) {
  const std::size_t n = a.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d r = _mm256_fnmadd_pd(_mm256_loadu_pd(b.data() + i), _mm256_loadu_pd(x.data() + i),
                                 _mm256_loadu_pd(a.data() + i));
    _mm256_storeu_pd(out.data() + i, r);
  }
  for (; i < n; ++i) out[i] = a[i] - b[i] * x[i];
}

double dot(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  std::size_t i = 0;
  __m256d acc = _mm256_setzero_pd();
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x.data() + i), _mm256_loadu_pd(y.data() + i), acc);
  double total = hsum(acc);
  for (; i < n; ++i) total += x[i] * y[i];
  return total;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
  std::size_t i = 0;
  const __m256d al = _mm256_set1_pd(alpha);
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y.data() + i,
                     _mm256_fmadd_pd(al, _mm256_loadu_pd(x.data() + i), _mm256_loadu_pd(y.data() + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

const KernelTable& avx2_table_unchecked() noexcept {
  static const KernelTable table{
      "avx2", max_value, sum_exp_shifted, exp_shifted, scale_offset, affine_utility, dot, axpy,
  };
  return table;
}

}  // namespace gevprice::kernels
