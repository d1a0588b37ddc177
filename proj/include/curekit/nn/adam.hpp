#pragma once

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "curekit/nn/tensor.hpp"

namespace curekit::nn {

// Adam with bias correction. Moment buffers are keyed by parameter name so
// the optimizer survives parameters being rebuilt between phases as long as
// names are stable. Moments are stored in the parameter precision (math in
// double), so a checkpointed optimizer resumes bit-exactly.
template <typename T = float>
class Adam {
 public:
  explicit Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // Applies one update with the given learning rate, then leaves gradients
  // untouched (caller zeroes them).
  void step(ParamStore<T>& params, double lr) {
    ++t_;
    double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (auto& up : params) {
      Param<T>& p = *up;
      if (p.t.grad.empty()) continue;
      Moments& mo = slots_[p.name];
      if (mo.m.size() != p.t.data.size()) {
        mo.m.assign(p.t.data.size(), T(0));
        mo.v.assign(p.t.data.size(), T(0));
      }
      for (size_t i = 0; i < p.t.data.size(); ++i) {
        double g = static_cast<double>(p.t.grad[i]);
        mo.m[i] = static_cast<T>(beta1_ * mo.m[i] + (1.0 - beta1_) * g);
        mo.v[i] = static_cast<T>(beta2_ * mo.v[i] + (1.0 - beta2_) * g * g);
        double mhat = static_cast<double>(mo.m[i]) / bc1;
        double vhat = static_cast<double>(mo.v[i]) / bc2;
        p.t.data[i] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + eps_));
      }
    }
  }

  int64_t steps_taken() const { return t_; }
  void set_steps_taken(int64_t t) { t_ = t; }

  struct Moments {
    std::vector<T> m, v;
  };
  const std::unordered_map<std::string, Moments>& slots() const { return slots_; }
  void set_slot(const std::string& name, std::vector<T> m, std::vector<T> v) {
    slots_[name] = Moments{std::move(m), std::move(v)};
  }

 private:
  double beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::unordered_map<std::string, Moments> slots_;
};

// Learning-rate schedule: linear ramp from 0 to peak over `warmup` steps,
// then cosine decay to 0 at `total` steps. Constant peak when warmup == 0
// and total == 0.
struct LrSchedule {
  double peak = 2.5e-4;
  int64_t warmup = 0;
  int64_t total = 0;

  double at(int64_t step) const {
    if (warmup > 0 && step < warmup) return peak * static_cast<double>(step) / static_cast<double>(warmup);
    if (total <= warmup) return peak;
    if (step >= total) return 0.0;
    double frac = static_cast<double>(step - warmup) / static_cast<double>(total - warmup);
    return peak * 0.5 * (1.0 + std::cos(frac * 3.14159265358979323846));
  }
};

}  // namespace curekit::nn
