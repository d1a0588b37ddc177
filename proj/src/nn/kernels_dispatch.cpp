#include "curekit/nn/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace curekit::nn::kernels {

bool avx2_available() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

const KernelTable& dispatch() {
  static const KernelTable* active = [] {
    const char* pick = std::getenv("CUREKIT_KERNEL");
    if (pick && std::strcmp(pick, "scalar") == 0) return &scalar_table();
    if (pick && std::strcmp(pick, "avx2") == 0 && avx2_available()) return &avx2_table();
    return avx2_available() ? &avx2_table() : &scalar_table();
  }();
  return *active;
}

}  // namespace curekit::nn::kernels
