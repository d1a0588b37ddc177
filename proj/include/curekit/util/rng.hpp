#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace curekit {

// Deterministic RNG with hand-rolled distributions. std::mt19937_64 is
// portable across platforms but the std:: distributions are not, so the
// uniform/normal transforms live here.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // [0, 1)
  double uniform() {
    return static_cast<double>(gen_() >> 11) * (1.0 / 9007199254740992.0);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [lo, hi] inclusive
  int64_t uniform_int(int64_t lo, int64_t hi) {
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int64_t>(gen_() % span);
  }

  // Box-Muller
  double normal(double mean = 0.0, double stddev = 1.0) {
    if (have_spare_) {
      have_spare_ = false;
      return mean + stddev * spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return mean + stddev * r * std::cos(a);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = gen_() % i;
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derive an independent stream, e.g. one per trial or per bug.
  Rng fork(uint64_t salt) {
    uint64_t s = gen_() ^ (salt * 0x9E3779B97F4A7C15ull + 0xD1B54A32D192ED03ull);
    return Rng(s);
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace curekit
