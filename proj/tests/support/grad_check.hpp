#pragma once

// Finite-difference oracle for the autodiff engine. A "builder" constructs
// the same scalar-loss graph from the current parameter values; the checker
// compares the engine's backward pass against central differences computed
// by re-running the builder on perturbed parameters. Everything runs in
// 64-bit so float noise cannot mask a wrong formula.
//
// Error metric: |fd - analytic| / max(1, |fd|, |analytic|) — relative for
// large gradients, absolute for small ones. Central differences with
// h = 1e-5 in double carry ~1e-11 intrinsic error, so a 1e-4 bound leaves
// three orders of headroom while still catching any wrong term.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "curekit/nn/graph.hpp"
#include "curekit/nn/tensor.hpp"

namespace curekit::testing {

using BuildFn = std::function<nn::NodeId(nn::Graph<double>&, nn::ParamStore<double>&)>;

struct GradCheckResult {
  double max_err = 0.0;
  std::string worst;  // "param_name[flat_index]"
};

inline double eval_loss(nn::ParamStore<double>& ps, const BuildFn& build) {
  nn::Graph<double> g;
  nn::NodeId loss = build(g, ps);
  return g.value(loss)[0];
}

inline GradCheckResult grad_check(nn::ParamStore<double>& ps, const BuildFn& build, double h = 1e-5) {
  ps.zero_grads();
  {
    nn::Graph<double> g;
    nn::NodeId loss = build(g, ps);
    g.backward(loss);
  }
  std::vector<std::vector<double>> analytic;
  for (auto& up : ps) {
    if (up->t.grad.empty())
      analytic.emplace_back(up->t.data.size(), 0.0);
    else
      analytic.push_back(up->t.grad);
  }
  GradCheckResult r;
  size_t pi = 0;
  for (auto& up : ps) {
    for (size_t i = 0; i < up->t.data.size(); ++i) {
      double orig = up->t.data[i];
      up->t.data[i] = orig + h;
      double lp = eval_loss(ps, build);
      up->t.data[i] = orig - h;
      double lm = eval_loss(ps, build);
      up->t.data[i] = orig;
      double fd = (lp - lm) / (2.0 * h);
      double an = analytic[pi][i];
      double err = std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)});
      if (err > r.max_err) {
        r.max_err = err;
        r.worst = up->name + "[" + std::to_string(i) + "]";
      }
    }
    ++pi;
  }
  return r;
}

}  // namespace curekit::testing
