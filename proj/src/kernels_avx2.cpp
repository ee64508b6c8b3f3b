// AVX2 variants of the denoiser inner loops. Compiled with -mavx2 only; the
// dispatcher never selects these on CPUs without AVX2. Lane arithmetic matches
// the scalar kernels operation-for-operation (mul + add, no FMA) so the two
// paths produce bit-identical results.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <bit>

#include "bcd/kernels.hpp"

namespace bcd::kernels::detail {

void magnitudes_squared_avx2(const cplx* x, double* out, std::size_t n) {
  const double* d = reinterpret_cast<const double*>(x);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    // a = [re0 im0 re1 im1], b = [re2 im2 re3 im3]
    __m256d a = _mm256_loadu_pd(d + 2 * i);
    __m256d b = _mm256_loadu_pd(d + 2 * i + 4);
    __m256d a2 = _mm256_mul_pd(a, a);
    __m256d b2 = _mm256_mul_pd(b, b);
    // hadd pairs within 128-bit lanes: [p0 p2 p1 p3]
    __m256d s = _mm256_hadd_pd(a2, b2);
    s = _mm256_permute4x64_pd(s, 0b11011000);  // -> [p0 p1 p2 p3]
    _mm256_storeu_pd(out + i, s);
  }
  for (; i < n; ++i) {
    const double re = x[i].real();
    const double im = x[i].imag();
    out[i] = re * re + im * im;
  }
}

std::size_t hard_threshold_scale_avx2(const cplx* x, const double* p, double eta,
                                      double inv_alpha, cplx* out,
                                      std::uint8_t* keep, std::size_t n) {
  const double* d = reinterpret_cast<const double*>(x);
  double* o = reinterpret_cast<double*>(out);
  const __m256d veta = _mm256_set1_pd(eta);
  const __m256d vinv = _mm256_set1_pd(inv_alpha);
  std::size_t kept = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vp = _mm256_loadu_pd(p + i);
    __m256d cmp = _mm256_cmp_pd(vp, veta, _CMP_GE_OQ);
    const unsigned mask = static_cast<unsigned>(_mm256_movemask_pd(cmp));
    kept += static_cast<std::size_t>(std::popcount(mask));
    keep[i] = (mask >> 0) & 1u;
    keep[i + 1] = (mask >> 1) & 1u;
    keep[i + 2] = (mask >> 2) & 1u;
    keep[i + 3] = (mask >> 3) & 1u;
    // duplicate each entry's decision onto its re/im lanes
    __m256d m01 = _mm256_permute4x64_pd(cmp, 0b01010000);
    __m256d m23 = _mm256_permute4x64_pd(cmp, 0b11111010);
    __m256d a = _mm256_mul_pd(_mm256_loadu_pd(d + 2 * i), vinv);
    __m256d b = _mm256_mul_pd(_mm256_loadu_pd(d + 2 * i + 4), vinv);
    _mm256_storeu_pd(o + 2 * i, _mm256_and_pd(a, m01));
    _mm256_storeu_pd(o + 2 * i + 4, _mm256_and_pd(b, m23));
  }
  for (; i < n; ++i) {
    if (p[i] >= eta) {
      out[i] = cplx(x[i].real() * inv_alpha, x[i].imag() * inv_alpha);
      keep[i] = 1;
      ++kept;
    } else {
      out[i] = cplx(0.0, 0.0);
      keep[i] = 0;
    }
  }
  return kept;
}

}  // namespace bcd::kernels::detail

#endif  // x86_64
