#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "curekit/util/errors.hpp"
#include "curekit/util/rng.hpp"

namespace curekit::nn {

inline int64_t numel_of(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

inline std::string shape_str(const std::vector<int64_t>& shape) {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

template <typename T>
struct Tensor {
  std::vector<int64_t> shape;
  std::vector<T> data;
  std::vector<T> grad;

  Tensor() = default;
  explicit Tensor(std::vector<int64_t> shp) : shape(std::move(shp)) {
    data.assign(static_cast<size_t>(numel_of(shape)), T(0));
  }
  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  int64_t rows() const { return shape.empty() ? 1 : shape[0]; }
  int64_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), T(0));
  }
  void zero_grad() { grad.assign(data.size(), T(0)); }
};

// Named trainable tensor. Gradients accumulate across a batch until the
// optimizer consumes them.
template <typename T>
struct Param {
  std::string name;
  Tensor<T> t;
};

template <typename T>
class ParamStore {
 public:
  Param<T>& create(const std::string& name, std::vector<int64_t> shape) {
    params_.push_back(std::make_unique<Param<T>>());
    auto& p = *params_.back();
    p.name = name;
    p.t = Tensor<T>(std::move(shape));
    p.t.ensure_grad();
    return p;
  }

  // uniform(-0.1, 0.1), used for embedding tables
  Param<T>& create_uniform(const std::string& name, std::vector<int64_t> shape, Rng& rng) {
    auto& p = create(name, std::move(shape));
    for (auto& v : p.t.data) v = static_cast<T>(rng.uniform(-0.1, 0.1));
    return p;
  }

  // normal(0, 1/sqrt(fan_in)), used for projections
  Param<T>& create_proj(const std::string& name, std::vector<int64_t> shape, int64_t fan_in, Rng& rng) {
    auto& p = create(name, std::move(shape));
    double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (auto& v : p.t.data) v = static_cast<T>(rng.normal(0.0, s));
    return p;
  }

  Param<T>* find(const std::string& name) {
    for (auto& p : params_) {
      if (p->name == name) return p.get();
    }
    return nullptr;
  }

  void zero_grads() {
    for (auto& p : params_) p->t.zero_grad();
  }

  size_t size() const { return params_.size(); }
  Param<T>& at(size_t i) { return *params_[i]; }
  const Param<T>& at(size_t i) const { return *params_[i]; }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::vector<std::unique_ptr<Param<T>>> params_;
};

}  // namespace curekit::nn
