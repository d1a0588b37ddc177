#pragma once

#include <cstddef>
#include <string>

namespace curekit::nn::kernels {

// Float inner loops behind the autodiff ops. Scalar reference versions and
// AVX2 versions share these signatures; dispatch() picks one set at first
// use based on CPU features, overridable with CUREKIT_KERNEL=scalar|avx2.
// The double-precision verification path always uses the scalar reference.
struct KernelTable {
  // c[m,n] += a[m,k] * b[k,n]
  void (*matmul_nn)(const float* a, const float* b, float* c, size_t m, size_t k, size_t n);
  // c[m,n] += a[m,k] * b[n,k]^T
  void (*matmul_nt)(const float* a, const float* b, float* c, size_t m, size_t k, size_t n);
  // c[k,n] += a[m,k]^T * b[m,n]
  void (*matmul_tn)(const float* a, const float* b, float* c, size_t m, size_t k, size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(float alpha, const float* x, float* y, size_t n);
  // out[i] = a[i] + b[i]
  void (*add)(const float* a, const float* b, float* out, size_t n);
  // out[i] = a[i] * b[i]
  void (*mul)(const float* a, const float* b, float* out, size_t n);
  float (*dot)(const float* a, const float* b, size_t n);
  float (*sum)(const float* x, size_t n);
  const char* name;
};

const KernelTable& scalar_table();
bool avx2_available();
const KernelTable& avx2_table();  // only valid when avx2_available()

// Active table for this process. Resolved once, before main spawns workers.
const KernelTable& dispatch();

}  // namespace curekit::nn::kernels
