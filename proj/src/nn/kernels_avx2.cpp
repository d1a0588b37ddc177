// Compiled with -mavx2 (no -mfma: mul+add keeps rounding close to scalar).
// Only entered after the cpuid check in kernels_dispatch.cpp.
#include "curekit/nn/kernels.hpp"

#if defined(__AVX2__)
#include <immintrin.h>

namespace curekit::nn::kernels {

namespace {

inline float hsum256(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  __m128 sh = _mm_movehdup_ps(lo);
  __m128 s = _mm_add_ps(lo, sh);
  sh = _mm_movehl_ps(sh, s);
  s = _mm_add_ss(s, sh);
  return _mm_cvtss_f32(s);
}

void v_matmul_nn(const float* a, const float* b, float* c, size_t m, size_t k, size_t n) {
  size_t n8 = n & ~size_t(7);
  for (size_t i = 0; i < m; ++i) {
    const float* ai = a + i * k;
    float* ci = c + i * n;
    for (size_t p = 0; p < k; ++p) {
      __m256 av = _mm256_set1_ps(ai[p]);
      const float* bp = b + p * n;
      size_t j = 0;
      for (; j < n8; j += 8) {
        __m256 cj = _mm256_loadu_ps(ci + j);
        __m256 bj = _mm256_loadu_ps(bp + j);
        cj = _mm256_add_ps(cj, _mm256_mul_ps(av, bj));
        _mm256_storeu_ps(ci + j, cj);
      }
      float avs = ai[p];
      for (; j < n; ++j) ci[j] += avs * bp[j];
    }
  }
}

void v_matmul_nt(const float* a, const float* b, float* c, size_t m, size_t k, size_t n) {
  size_t k8 = k & ~size_t(7);
  for (size_t i = 0; i < m; ++i) {
    const float* ai = a + i * k;
    float* ci = c + i * n;
    for (size_t j = 0; j < n; ++j) {
      const float* bj = b + j * k;
      __m256 acc = _mm256_setzero_ps();
      size_t p = 0;
      for (; p < k8; p += 8)
        acc = _mm256_add_ps(acc, _mm256_mul_ps(_mm256_loadu_ps(ai + p), _mm256_loadu_ps(bj + p)));
      float s = hsum256(acc);
      for (; p < k; ++p) s += ai[p] * bj[p];
      ci[j] += s;
    }
  }
}

void v_matmul_tn(const float* a, const float* b, float* c, size_t m, size_t k, size_t n) {
  size_t n8 = n & ~size_t(7);
  for (size_t i = 0; i < m; ++i) {
    const float* ai = a + i * k;
    const float* bi = b + i * n;
    for (size_t p = 0; p < k; ++p) {
      __m256 av = _mm256_set1_ps(ai[p]);
      float* cp = c + p * n;
      size_t j = 0;
      for (; j < n8; j += 8) {
        __m256 cj = _mm256_loadu_ps(cp + j);
        cj = _mm256_add_ps(cj, _mm256_mul_ps(av, _mm256_loadu_ps(bi + j)));
        _mm256_storeu_ps(cp + j, cj);
      }
      float avs = ai[p];
      for (; j < n; ++j) cp[j] += avs * bi[j];
    }
  }
}

void v_axpy(float alpha, const float* x, float* y, size_t n) {
  __m256 av = _mm256_set1_ps(alpha);
  size_t n8 = n & ~size_t(7);
  size_t i = 0;
  for (; i < n8; i += 8) {
    __m256 yi = _mm256_loadu_ps(y + i);
    yi = _mm256_add_ps(yi, _mm256_mul_ps(av, _mm256_loadu_ps(x + i)));
    _mm256_storeu_ps(y + i, yi);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void v_add(const float* a, const float* b, float* out, size_t n) {
  size_t n8 = n & ~size_t(7);
  size_t i = 0;
  for (; i < n8; i += 8)
    _mm256_storeu_ps(out + i, _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void v_mul(const float* a, const float* b, float* out, size_t n) {
  size_t n8 = n & ~size_t(7);
  size_t i = 0;
  for (; i < n8; i += 8)
    _mm256_storeu_ps(out + i, _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

float v_dot(const float* a, const float* b, size_t n) {
  __m256 acc = _mm256_setzero_ps();
  size_t n8 = n & ~size_t(7);
  size_t i = 0;
  for (; i < n8; i += 8)
    acc = _mm256_add_ps(acc, _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  float s = hsum256(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

float v_sum(const float* x, size_t n) {
  __m256 acc = _mm256_setzero_ps();
  size_t n8 = n & ~size_t(7);
  size_t i = 0;
  for (; i < n8; i += 8) acc = _mm256_add_ps(acc, _mm256_loadu_ps(x + i));
  float s = hsum256(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable t{v_matmul_nn, v_matmul_nt, v_matmul_tn,
                             v_axpy,      v_add,       v_mul,
                             v_dot,       v_sum,       "avx2"};
  return t;
}

}  // namespace curekit::nn::kernels

#else

namespace curekit::nn::kernels {
const KernelTable& avx2_table() { return scalar_table(); }
}  // namespace curekit::nn::kernels

#endif
