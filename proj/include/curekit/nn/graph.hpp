#pragma once

#include <cmath>
#include <cstring>
#include <deque>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "curekit/nn/kernels.hpp"
#include "curekit/nn/tensor.hpp"

namespace curekit::nn {

namespace detail {

// Generic scalar loops; float specializations route to the dispatched
// kernel table. The double instantiation is the verification path.
template <typename T>
void k_matmul_nn(const T* a, const T* b, T* c, size_t m, size_t k, size_t n) {
  for (size_t i = 0; i < m; ++i)
    for (size_t p = 0; p < k; ++p) {
      T av = a[i * k + p];
      for (size_t j = 0; j < n; ++j) c[i * n + j] += av * b[p * n + j];
    }
}
template <typename T>
void k_matmul_nt(const T* a, const T* b, T* c, size_t m, size_t k, size_t n) {
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < n; ++j) {
      T acc = 0;
      for (size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[j * k + p];
      c[i * n + j] += acc;
    }
}
template <typename T>
void k_matmul_tn(const T* a, const T* b, T* c, size_t m, size_t k, size_t n) {
  for (size_t i = 0; i < m; ++i)
    for (size_t p = 0; p < k; ++p) {
      T av = a[i * k + p];
      for (size_t j = 0; j < n; ++j) c[p * n + j] += av * b[i * n + j];
    }
}
template <typename T>
void k_axpy(T alpha, const T* x, T* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <>
inline void k_matmul_nn<float>(const float* a, const float* b, float* c, size_t m, size_t k, size_t n) {
  kernels::dispatch().matmul_nn(a, b, c, m, k, n);
}
template <>
inline void k_matmul_nt<float>(const float* a, const float* b, float* c, size_t m, size_t k, size_t n) {
  kernels::dispatch().matmul_nt(a, b, c, m, k, n);
}
template <>
inline void k_matmul_tn<float>(const float* a, const float* b, float* c, size_t m, size_t k, size_t n) {
  kernels::dispatch().matmul_tn(a, b, c, m, k, n);
}
template <>
inline void k_axpy<float>(float alpha, const float* x, float* y, size_t n) {
  kernels::dispatch().axpy(alpha, x, y, n);
}

}  // namespace detail

// Handle into a Graph's tape.
struct NodeId {
  int32_t idx = -1;
  bool valid() const { return idx >= 0; }
};

// Forward-eager tape: building an op computes its value immediately and
// records a closure for the backward sweep. backward() walks the tape in
// reverse creation order, which is a valid topological order by
// construction. One Graph per forward pass; not reusable across passes.
template <typename T>
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // ---- leaves ----

  NodeId constant(std::vector<int64_t> shape, std::vector<T> data) {
    if (numel_of(shape) != static_cast<int64_t>(data.size()))
      throw ShapeMismatch("constant", shape_str(shape), "data size " + std::to_string(data.size()));
    Node& nd = push(std::move(shape));
    nd.value = std::move(data);
    nd.grad.assign(nd.value.size(), T(0));
    return nd.id;
  }

  NodeId param(Param<T>& p) {
    Node& nd = push(p.t.shape);
    nd.value = p.t.data;
    nd.grad.assign(nd.value.size(), T(0));
    Param<T>* pp = &p;
    NodeId id = nd.id;
    nd.back = [this, id, pp]() {
      pp->t.ensure_grad();
      detail::k_axpy<T>(T(1), at(id).grad.data(), pp->t.grad.data(), pp->t.grad.size());
    };
    return id;
  }

  // Gather rows of an embedding table; backward scatters into the param.
  NodeId embedding(Param<T>& table, std::span<const int> ids) {
    int64_t v = table.t.shape[0], d = table.t.shape[1];
    for (int id : ids)
      if (id < 0 || id >= v) throw InternalError("embedding: id " + std::to_string(id) + " out of range");
    Node& nd = push({static_cast<int64_t>(ids.size()), d});
    nd.value.resize(ids.size() * d);
    nd.grad.assign(nd.value.size(), T(0));
    for (size_t i = 0; i < ids.size(); ++i)
      std::memcpy(nd.value.data() + i * d, table.t.data.data() + ids[i] * d, sizeof(T) * d);
    std::vector<int> idv(ids.begin(), ids.end());
    Param<T>* tp = &table;
    NodeId id = nd.id;
    nd.back = [this, id, tp, idv = std::move(idv), d]() {
      tp->t.ensure_grad();
      const auto& g = at(id).grad;
      for (size_t i = 0; i < idv.size(); ++i)
        detail::k_axpy<T>(T(1), g.data() + i * d, tp->t.grad.data() + idv[i] * d, d);
    };
    return id;
  }

  // ---- elementwise ----

  NodeId add(NodeId a, NodeId b) {
    check_same("add", a, b);
    Node& nd = push(at(a).shape);
    binary_map(a, b, nd, [](T x, T y) { return x + y; });
    NodeId id = nd.id;
    nd.back = [this, id, a, b]() {
      accum(a, at(id).grad);
      accum(b, at(id).grad);
    };
    return id;
  }

  // out = a + alpha * b (same shape; scalars included)
  NodeId add_scaled(NodeId a, NodeId b, T alpha) {
    check_same("add_scaled", a, b);
    Node& nd = push(at(a).shape);
    nd.value.resize(at(a).value.size());
    for (size_t i = 0; i < nd.value.size(); ++i) nd.value[i] = at(a).value[i] + alpha * at(b).value[i];
    nd.grad.assign(nd.value.size(), T(0));
    NodeId id = nd.id;
    nd.back = [this, id, a, b, alpha]() {
      accum(a, at(id).grad);
      detail::k_axpy<T>(alpha, at(id).grad.data(), at(b).grad.data(), at(b).grad.size());
    };
    return id;
  }

  NodeId mul(NodeId a, NodeId b) {
    check_same("mul", a, b);
    Node& nd = push(at(a).shape);
    binary_map(a, b, nd, [](T x, T y) { return x * y; });
    NodeId id = nd.id;
    nd.back = [this, id, a, b]() {
      const auto& g = at(id).grad;
      for (size_t i = 0; i < g.size(); ++i) {
        at(a).grad[i] += g[i] * at(b).value[i];
        at(b).grad[i] += g[i] * at(a).value[i];
      }
    };
    return id;
  }

  NodeId scale(NodeId a, T c) {
    Node& nd = push(at(a).shape);
    nd.value.resize(at(a).value.size());
    for (size_t i = 0; i < nd.value.size(); ++i) nd.value[i] = at(a).value[i] * c;
    nd.grad.assign(nd.value.size(), T(0));
    NodeId id = nd.id;
    nd.back = [this, id, a, c]() { detail::k_axpy<T>(c, at(id).grad.data(), at(a).grad.data(), at(a).grad.size()); };
    return id;
  }

  // x[m,n] + b[n] broadcast over rows
  NodeId add_bias(NodeId x, NodeId b) {
    int64_t m = at(x).shape[0], n = at(x).shape[1];
    if (at(b).value.size() != static_cast<size_t>(n))
      throw ShapeMismatch("add_bias", shape_str(at(x).shape), shape_str(at(b).shape));
    Node& nd = push(at(x).shape);
    nd.value.resize(at(x).value.size());
    for (int64_t i = 0; i < m; ++i)
      for (int64_t j = 0; j < n; ++j) nd.value[i * n + j] = at(x).value[i * n + j] + at(b).value[j];
    nd.grad.assign(nd.value.size(), T(0));
    NodeId id = nd.id;
    nd.back = [this, id, x, b, m, n]() {
      const auto& g = at(id).grad;
      detail::k_axpy<T>(T(1), g.data(), at(x).grad.data(), g.size());
      for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < n; ++j) at(b).grad[j] += g[i * n + j];
    };
    return id;
  }

  // ---- linear algebra ----

  NodeId matmul(NodeId a, NodeId b) {
    int64_t m = at(a).shape[0], k = at(a).shape[1];
    int64_t k2 = at(b).shape[0], n = at(b).shape[1];
    if (k != k2) throw ShapeMismatch("matmul", shape_str(at(a).shape), shape_str(at(b).shape));
    Node& nd = push({m, n});
    nd.value.assign(m * n, T(0));
    nd.grad.assign(m * n, T(0));
    detail::k_matmul_nn<T>(at(a).value.data(), at(b).value.data(), nd.value.data(), m, k, n);
    NodeId id = nd.id;
    nd.back = [this, id, a, b, m, k, n]() {
      const auto& g = at(id).grad;
      detail::k_matmul_nt<T>(g.data(), at(b).value.data(), at(a).grad.data(), m, n, k);
      detail::k_matmul_tn<T>(at(a).value.data(), g.data(), at(b).grad.data(), m, k, n);
    };
    return id;
  }

  NodeId linear(NodeId x, Param<T>& w, Param<T>& b) { return add_bias(matmul(x, param(w)), param(b)); }

  // ---- shape plumbing ----

  NodeId slice_rows(NodeId x, int64_t start, int64_t len) {
    int64_t m = at(x).shape[0], n = at(x).cols();
    if (start < 0 || len < 0 || start + len > m)
      throw InternalError("slice_rows: [" + std::to_string(start) + "," + std::to_string(start + len) +
                          ") out of " + std::to_string(m) + " rows");
    Node& nd = push({len, n});
    nd.value.assign(at(x).value.begin() + start * n, at(x).value.begin() + (start + len) * n);
    nd.grad.assign(nd.value.size(), T(0));
    NodeId id = nd.id;
    nd.back = [this, id, x, start, n]() {
      detail::k_axpy<T>(T(1), at(id).grad.data(), at(x).grad.data() + start * n, at(id).grad.size());
    };
    return id;
  }

  NodeId concat_rows(NodeId a, NodeId b) {
    int64_t n = at(a).cols();
    if (n != at(b).cols()) throw ShapeMismatch("concat_rows", shape_str(at(a).shape), shape_str(at(b).shape));
    int64_t ma = at(a).shape[0], mb = at(b).shape[0];
    Node& nd = push({ma + mb, n});
    nd.value = at(a).value;
    nd.value.insert(nd.value.end(), at(b).value.begin(), at(b).value.end());
    nd.grad.assign(nd.value.size(), T(0));
    NodeId id = nd.id;
    nd.back = [this, id, a, b, ma, n]() {
      const auto& g = at(id).grad;
      detail::k_axpy<T>(T(1), g.data(), at(a).grad.data(), ma * n);
      detail::k_axpy<T>(T(1), g.data() + ma * n, at(b).grad.data(), g.size() - ma * n);
    };
    return id;
  }

  NodeId concat_cols(NodeId a, NodeId b) {
    int64_t m = at(a).shape[0];
    if (m != at(b).shape[0]) throw ShapeMismatch("concat_cols", shape_str(at(a).shape), shape_str(at(b).shape));
    int64_t na = at(a).cols(), nb = at(b).cols();
    Node& nd = push({m, na + nb});
    nd.value.resize(m * (na + nb));
    for (int64_t i = 0; i < m; ++i) {
      std::memcpy(nd.value.data() + i * (na + nb), at(a).value.data() + i * na, sizeof(T) * na);
      std::memcpy(nd.value.data() + i * (na + nb) + na, at(b).value.data() + i * nb, sizeof(T) * nb);
    }
    nd.grad.assign(nd.value.size(), T(0));
    NodeId id = nd.id;
    nd.back = [this, id, a, b, m, na, nb]() {
      const auto& g = at(id).grad;
      for (int64_t i = 0; i < m; ++i) {
        detail::k_axpy<T>(T(1), g.data() + i * (na + nb), at(a).grad.data() + i * na, na);
        detail::k_axpy<T>(T(1), g.data() + i * (na + nb) + na, at(b).grad.data() + i * nb, nb);
      }
    };
    return id;
  }

  NodeId mean_rows(NodeId x) {
    int64_t m = at(x).shape[0], n = at(x).cols();
    Node& nd = push({1, n});
    nd.value.assign(n, T(0));
    for (int64_t i = 0; i < m; ++i)
      for (int64_t j = 0; j < n; ++j) nd.value[j] += at(x).value[i * n + j];
    for (auto& v : nd.value) v /= static_cast<T>(m);
    nd.grad.assign(n, T(0));
    NodeId id = nd.id;
    nd.back = [this, id, x, m, n]() {
      T inv = T(1) / static_cast<T>(m);
      for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < n; ++j) at(x).grad[i * n + j] += at(id).grad[j] * inv;
    };
    return id;
  }

  NodeId broadcast_row(NodeId x, int64_t m) {
    int64_t n = at(x).cols();
    if (at(x).shape[0] != 1) throw ShapeMismatch("broadcast_row", shape_str(at(x).shape), "[1,n]");
    Node& nd = push({m, n});
    nd.value.resize(m * n);
    for (int64_t i = 0; i < m; ++i) std::memcpy(nd.value.data() + i * n, at(x).value.data(), sizeof(T) * n);
    nd.grad.assign(nd.value.size(), T(0));
    NodeId id = nd.id;
    nd.back = [this, id, x, m, n]() {
      for (int64_t i = 0; i < m; ++i) detail::k_axpy<T>(T(1), at(id).grad.data() + i * n, at(x).grad.data(), n);
    };
    return id;
  }

  NodeId mean_all(NodeId x) {
    Node& nd = push({1});
    T acc = T(0);
    for (T v : at(x).value) acc += v;
    size_t n = at(x).value.size();
    nd.value = {acc / static_cast<T>(n)};
    nd.grad.assign(1, T(0));
    NodeId id = nd.id;
    nd.back = [this, id, x, n]() {
      T g = at(id).grad[0] / static_cast<T>(n);
      for (auto& v : at(x).grad) v += g;
    };
    return id;
  }

  // ---- activations / normalization ----

  // x[m,2n] -> first half gated by sigmoid of second half
  NodeId glu(NodeId x) {
    int64_t m = at(x).shape[0], w = at(x).cols();
    if (w % 2 != 0) throw ShapeMismatch("glu", shape_str(at(x).shape), "[m,2n]");
    int64_t n = w / 2;
    Node& nd = push({m, n});
    nd.value.resize(m * n);
    nd.grad.assign(m * n, T(0));
    for (int64_t i = 0; i < m; ++i)
      for (int64_t j = 0; j < n; ++j) {
        T a = at(x).value[i * w + j];
        T b = at(x).value[i * w + n + j];
        nd.value[i * n + j] = a * sigmoid(b);
      }
    NodeId id = nd.id;
    nd.back = [this, id, x, m, n, w]() {
      const auto& g = at(id).grad;
      for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < n; ++j) {
          T a = at(x).value[i * w + j];
          T b = at(x).value[i * w + n + j];
          T s = sigmoid(b);
          at(x).grad[i * w + j] += g[i * n + j] * s;
          at(x).grad[i * w + n + j] += g[i * n + j] * a * s * (T(1) - s);
        }
    };
    return id;
  }

  // Exact Gaussian-error-linear unit: x * Phi(x) with the erf form, not
  // the tanh approximation, so the finite-difference oracle is meaningful.
  NodeId gelu(NodeId x) {
    Node& nd = push(at(x).shape);
    nd.value.resize(at(x).value.size());
    nd.grad.assign(nd.value.size(), T(0));
    for (size_t i = 0; i < nd.value.size(); ++i) {
      T v = at(x).value[i];
      nd.value[i] = v * phi_cdf(v);
    }
    NodeId id = nd.id;
    nd.back = [this, id, x]() {
      const auto& g = at(id).grad;
      constexpr T kInvSqrt2Pi = T(0.3989422804014326779);
      for (size_t i = 0; i < g.size(); ++i) {
        T v = at(x).value[i];
        T pdf = kInvSqrt2Pi * std::exp(T(-0.5) * v * v);
        at(x).grad[i] += g[i] * (phi_cdf(v) + v * pdf);
      }
    };
    return id;
  }

  NodeId layer_norm(NodeId x, NodeId gain, NodeId bias, T eps = T(1e-5)) {
    int64_t m = at(x).shape[0], n = at(x).cols();
    if (at(gain).value.size() != static_cast<size_t>(n) || at(bias).value.size() != static_cast<size_t>(n))
      throw ShapeMismatch("layer_norm", shape_str(at(x).shape), shape_str(at(gain).shape));
    Node& nd = push(at(x).shape);
    nd.value.resize(at(x).value.size());
    nd.grad.assign(nd.value.size(), T(0));
    std::vector<T> xhat(m * n), inv_s(m);
    for (int64_t i = 0; i < m; ++i) {
      const T* xi = at(x).value.data() + i * n;
      T mu = T(0);
      for (int64_t j = 0; j < n; ++j) mu += xi[j];
      mu /= static_cast<T>(n);
      T var = T(0);
      for (int64_t j = 0; j < n; ++j) var += (xi[j] - mu) * (xi[j] - mu);
      var /= static_cast<T>(n);
      T is = T(1) / std::sqrt(var + eps);
      inv_s[i] = is;
      for (int64_t j = 0; j < n; ++j) {
        xhat[i * n + j] = (xi[j] - mu) * is;
        nd.value[i * n + j] = at(gain).value[j] * xhat[i * n + j] + at(bias).value[j];
      }
    }
    NodeId id = nd.id;
    nd.back = [this, id, x, gain, bias, m, n, xhat = std::move(xhat), inv_s = std::move(inv_s)]() {
      const auto& g = at(id).grad;
      for (int64_t i = 0; i < m; ++i) {
        T sum_gd = T(0), sum_gdx = T(0);
        for (int64_t j = 0; j < n; ++j) {
          T gd = g[i * n + j] * at(gain).value[j];
          sum_gd += gd;
          sum_gdx += gd * xhat[i * n + j];
        }
        T invn = T(1) / static_cast<T>(n);
        for (int64_t j = 0; j < n; ++j) {
          T gd = g[i * n + j] * at(gain).value[j];
          at(x).grad[i * n + j] += inv_s[i] * (gd - sum_gd * invn - xhat[i * n + j] * sum_gdx * invn);
          at(gain).grad[j] += g[i * n + j] * xhat[i * n + j];
          at(bias).grad[j] += g[i * n + j];
        }
      }
    };
    return id;
  }

  // Rowwise softmax; causal=true masks column j > i before normalizing
  // (rows and columns must then agree in count).
  NodeId softmax(NodeId x, bool causal = false) {
    int64_t m = at(x).shape[0], n = at(x).cols();
    Node& nd = push(at(x).shape);
    nd.value.resize(at(x).value.size());
    nd.grad.assign(nd.value.size(), T(0));
    for (int64_t i = 0; i < m; ++i) {
      int64_t lim = causal ? std::min<int64_t>(i + 1, n) : n;
      const T* xi = at(x).value.data() + i * n;
      T mx = -std::numeric_limits<T>::infinity();
      for (int64_t j = 0; j < lim; ++j) mx = std::max(mx, xi[j]);
      T z = T(0);
      for (int64_t j = 0; j < lim; ++j) z += std::exp(xi[j] - mx);
      for (int64_t j = 0; j < lim; ++j) nd.value[i * n + j] = std::exp(xi[j] - mx) / z;
      for (int64_t j = lim; j < n; ++j) nd.value[i * n + j] = T(0);
    }
    NodeId id = nd.id;
    nd.back = [this, id, x, m, n]() {
      const auto& y = at(id).value;
      const auto& g = at(id).grad;
      for (int64_t i = 0; i < m; ++i) {
        T dot = T(0);
        for (int64_t j = 0; j < n; ++j) dot += g[i * n + j] * y[i * n + j];
        for (int64_t j = 0; j < n; ++j) at(x).grad[i * n + j] += y[i * n + j] * (g[i * n + j] - dot);
      }
    };
    return id;
  }

  NodeId log_softmax(NodeId x) {
    int64_t m = at(x).shape[0], n = at(x).cols();
    Node& nd = push(at(x).shape);
    nd.value.resize(at(x).value.size());
    nd.grad.assign(nd.value.size(), T(0));
    for (int64_t i = 0; i < m; ++i) {
      const T* xi = at(x).value.data() + i * n;
      T mx = xi[0];
      for (int64_t j = 1; j < n; ++j) mx = std::max(mx, xi[j]);
      T z = T(0);
      for (int64_t j = 0; j < n; ++j) z += std::exp(xi[j] - mx);
      T lse = mx + std::log(z);
      for (int64_t j = 0; j < n; ++j) nd.value[i * n + j] = xi[j] - lse;
    }
    NodeId id = nd.id;
    nd.back = [this, id, x, m, n]() {
      const auto& y = at(id).value;
      const auto& g = at(id).grad;
      for (int64_t i = 0; i < m; ++i) {
        T gsum = T(0);
        for (int64_t j = 0; j < n; ++j) gsum += g[i * n + j];
        for (int64_t j = 0; j < n; ++j) at(x).grad[i * n + j] += g[i * n + j] - std::exp(y[i * n + j]) * gsum;
      }
    };
    return id;
  }

  // Mean negative log-likelihood over rows.
  NodeId cross_entropy(NodeId logits, std::span<const int> targets) {
    int64_t m = at(logits).shape[0], n = at(logits).cols();
    if (static_cast<int64_t>(targets.size()) != m)
      throw ShapeMismatch("cross_entropy", shape_str(at(logits).shape),
                          "targets[" + std::to_string(targets.size()) + "]");
    Node& nd = push({1});
    nd.grad.assign(1, T(0));
    std::vector<T> probs(m * n);
    T loss = T(0);
    for (int64_t i = 0; i < m; ++i) {
      const T* xi = at(logits).value.data() + i * n;
      T mx = xi[0];
      for (int64_t j = 1; j < n; ++j) mx = std::max(mx, xi[j]);
      T z = T(0);
      for (int64_t j = 0; j < n; ++j) z += std::exp(xi[j] - mx);
      for (int64_t j = 0; j < n; ++j) probs[i * n + j] = std::exp(xi[j] - mx) / z;
      loss -= (xi[targets[i]] - mx - std::log(z));
    }
    nd.value = {loss / static_cast<T>(m)};
    std::vector<int> tg(targets.begin(), targets.end());
    NodeId id = nd.id;
    nd.back = [this, id, logits, m, n, probs = std::move(probs), tg = std::move(tg)]() {
      T g = at(id).grad[0] / static_cast<T>(m);
      for (int64_t i = 0; i < m; ++i) {
        for (int64_t j = 0; j < n; ++j) at(logits).grad[i * n + j] += g * probs[i * n + j];
        at(logits).grad[i * n + tg[i]] -= g;
      }
    };
    return id;
  }

  // Scaled dot-product attention, composed from recorded primitives so the
  // backward sweep needs no extra formula.
  NodeId attention(NodeId q, NodeId k, NodeId v, bool causal) {
    T inv = T(1) / std::sqrt(static_cast<T>(at(k).cols()));
    NodeId scores = scale(matmul_nt(q, k), inv);
    NodeId a = softmax(scores, causal);
    return matmul(a, v);
  }

  // q[m,d] * k[n,d]^T without materializing a transpose.
  NodeId matmul_nt(NodeId a, NodeId b) {
    int64_t m = at(a).shape[0], k = at(a).cols();
    int64_t n = at(b).shape[0];
    if (k != at(b).cols()) throw ShapeMismatch("matmul_nt", shape_str(at(a).shape), shape_str(at(b).shape));
    Node& nd = push({m, n});
    nd.value.assign(m * n, T(0));
    nd.grad.assign(m * n, T(0));
    detail::k_matmul_nt<T>(at(a).value.data(), at(b).value.data(), nd.value.data(), m, k, n);
    NodeId id = nd.id;
    nd.back = [this, id, a, b, m, k, n]() {
      const auto& g = at(id).grad;
      // dA += g * B ; dB += g^T * A
      detail::k_matmul_nn<T>(g.data(), at(b).value.data(), at(a).grad.data(), m, n, k);
      detail::k_matmul_tn<T>(g.data(), at(a).value.data(), at(b).grad.data(), m, n, k);
    };
    return id;
  }

  // 1-D convolution over rows. x[t,ci], w[kw,ci,co] flattened, out[t',co]
  // with t' = t + pad_left + pad_right - kw + 1.
  NodeId conv1d(NodeId x, NodeId w, NodeId b, int64_t kw, int64_t pad_left, int64_t pad_right) {
    int64_t t = at(x).shape[0], ci = at(x).cols();
    if (at(w).shape.size() != 3 || at(w).shape[0] != kw || at(w).shape[1] != ci)
      throw ShapeMismatch("conv1d", shape_str(at(w).shape), "[kw,ci,co]");
    int64_t co = at(w).shape[2];
    int64_t to = t + pad_left + pad_right - kw + 1;
    if (to < 1) throw ShapeMismatch("conv1d", "output rows " + std::to_string(to), ">= 1");
    Node& nd = push({to, co});
    nd.value.assign(to * co, T(0));
    nd.grad.assign(to * co, T(0));
    for (int64_t o = 0; o < to; ++o)
      for (int64_t j = 0; j < co; ++j) nd.value[o * co + j] = at(b).value[j];
    // per-tap matmul over the valid output range
    for (int64_t dk = 0; dk < kw; ++dk) {
      int64_t o0 = std::max<int64_t>(0, pad_left - dk);
      int64_t o1 = std::min<int64_t>(to - 1, t - 1 + pad_left - dk);
      if (o0 > o1) continue;
      int64_t rows = o1 - o0 + 1;
      const T* xs = at(x).value.data() + (o0 + dk - pad_left) * ci;
      const T* ws = at(w).value.data() + dk * ci * co;
      detail::k_matmul_nn<T>(xs, ws, nd.value.data() + o0 * co, rows, ci, co);
    }
    NodeId id = nd.id;
    nd.back = [this, id, x, w, b, kw, pad_left, t, ci, co, to]() {
      const auto& g = at(id).grad;
      for (int64_t o = 0; o < to; ++o)
        for (int64_t j = 0; j < co; ++j) at(b).grad[j] += g[o * co + j];
      for (int64_t dk = 0; dk < kw; ++dk) {
        int64_t o0 = std::max<int64_t>(0, pad_left - dk);
        int64_t o1 = std::min<int64_t>(to - 1, t - 1 + pad_left - dk);
        if (o0 > o1) continue;
        int64_t rows = o1 - o0 + 1;
        int64_t xoff = (o0 + dk - pad_left) * ci;
        const T* ws = at(w).value.data() + dk * ci * co;
        // dx += g * W^T ; dW += x^T * g
        detail::k_matmul_nt<T>(g.data() + o0 * co, ws, at(x).grad.data() + xoff, rows, co, ci);
        detail::k_matmul_tn<T>(at(x).value.data() + xoff, g.data() + o0 * co, at(w).grad.data() + dk * ci * co,
                               rows, ci, co);
      }
    };
    return id;
  }

  // Inverted dropout; identity when rate == 0.
  NodeId dropout(NodeId x, double rate, Rng& rng) {
    if (rate <= 0.0) return x;
    Node& nd = push(at(x).shape);
    nd.value.resize(at(x).value.size());
    nd.grad.assign(nd.value.size(), T(0));
    std::vector<T> mask(nd.value.size());
    T keep = static_cast<T>(1.0 - rate);
    for (size_t i = 0; i < mask.size(); ++i) {
      mask[i] = (rng.uniform() < rate) ? T(0) : T(1) / keep;
      nd.value[i] = at(x).value[i] * mask[i];
    }
    NodeId id = nd.id;
    nd.back = [this, id, x, mask = std::move(mask)]() {
      for (size_t i = 0; i < mask.size(); ++i) at(x).grad[i] += at(id).grad[i] * mask[i];
    };
    return id;
  }

  // ---- access / backward ----

  const std::vector<T>& value(NodeId id) const { return at(id).value; }
  const std::vector<int64_t>& shape(NodeId id) const { return at(id).shape; }

  void backward(NodeId root) {
    if (at(root).value.size() != 1) throw InternalError("backward: root must be scalar");
    at(root).grad[0] = T(1);
    for (int32_t i = static_cast<int32_t>(nodes_.size()) - 1; i >= 0; --i) {
      if (nodes_[i].back) nodes_[i].back();
    }
  }

  size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    NodeId id;
    std::vector<int64_t> shape;
    std::vector<T> value;
    std::vector<T> grad;
    std::function<void()> back;
    int64_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  };

  Node& push(std::vector<int64_t> shape) {
    nodes_.emplace_back();
    Node& nd = nodes_.back();
    nd.id.idx = static_cast<int32_t>(nodes_.size()) - 1;
    nd.shape = std::move(shape);
    return nd;
  }

  Node& at(NodeId id) { return nodes_[id.idx]; }
  const Node& at(NodeId id) const { return nodes_[id.idx]; }

  void check_same(const char* op, NodeId a, NodeId b) const {
    if (at(a).shape != at(b).shape) throw ShapeMismatch(op, shape_str(at(a).shape), shape_str(at(b).shape));
  }

  template <typename F>
  void binary_map(NodeId a, NodeId b, Node& out, F f) {
    out.value.resize(at(a).value.size());
    for (size_t i = 0; i < out.value.size(); ++i) out.value[i] = f(at(a).value[i], at(b).value[i]);
    out.grad.assign(out.value.size(), T(0));
  }

  void accum(NodeId dst, const std::vector<T>& g) {
    detail::k_axpy<T>(T(1), g.data(), at(dst).grad.data(), g.size());
  }

  static T sigmoid(T v) { return T(1) / (T(1) + std::exp(-v)); }
  static T phi_cdf(T v) { return T(0.5) * (T(1) + std::erf(v * T(0.7071067811865475244))); }

  std::deque<Node> nodes_;
};

}  // namespace curekit::nn
