#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "glunet/tensor.hpp"

namespace glunet {

/// Reverse-mode tape. Nodes are appended in topological order during the
/// forward pass, so backward() is a single reverse walk that visits each
/// node exactly once. One graph per training step; graphs are never reused.
template <typename T>
class GraphT {
 public:
  using Tensor = TensorT<T>;
  using BackwardFn = std::function<void(GraphT&, int)>;

  /// When false, nodes are emitted without backward closures (cheap
  /// forward-only evaluation for scoring and benchmarking).
  bool grad_enabled = true;

  int leaf(Tensor value, std::string op = "leaf") {
    return emit(std::move(value), {}, nullptr, std::move(op));
  }

  int emit(Tensor value, std::vector<int> inputs, BackwardFn backward, std::string op) {
    for (int id : inputs) check_id(id);
    Node node;
    node.value = std::move(value);
    node.inputs = std::move(inputs);
    node.backward = grad_enabled ? std::move(backward) : nullptr;
    node.op = std::move(op);
    nodes_.push_back(std::move(node));
    return static_cast<int>(nodes_.size()) - 1;
  }

  int size() const { return static_cast<int>(nodes_.size()); }

  const Tensor& value(int id) const {
    check_id(id);
    return nodes_[id].value;
  }

  const std::string& op_name(int id) const {
    check_id(id);
    return nodes_[id].op;
  }

  bool has_grad(int id) const {
    check_id(id);
    return id < static_cast<int>(grads_.size()) && !grads_[id].empty();
  }

  /// Gradient buffer for a node; zero-allocated on first touch.
  Tensor& grad_buffer(int id) {
    check_id(id);
    if (grads_.size() < nodes_.size()) grads_.resize(nodes_.size());
    if (grads_[id].empty()) grads_[id] = Tensor::zeros(nodes_[id].value.shape);
    return grads_[id];
  }

  const Tensor& grad(int id) const {
    check_id(id);
    if (id >= static_cast<int>(grads_.size()) || grads_[id].empty()) {
      throw ContractError("graph: no gradient for node " + std::to_string(id) + " (" + nodes_[id].op +
                          "); run backward() on a path that reaches it");
    }
    return grads_[id];
  }

  /// Accumulates dLoss/dNode into every reachable node's gradient buffer.
  void backward(int loss_id) {
    check_id(loss_id);
    if (nodes_[loss_id].value.numel() != 1) {
      throw ContractError("backward: loss must be scalar, got " + shape_str(nodes_[loss_id].value.shape));
    }
    grads_.assign(nodes_.size(), Tensor{});
    grad_buffer(loss_id).data[0] = T(1);
    for (int id = loss_id; id >= 0; --id) {
      if (grads_[id].empty()) continue;  // nothing flowed into this node
      if (nodes_[id].backward) nodes_[id].backward(*this, id);
    }
  }

  std::uint64_t macs() const { return macs_; }
  void add_macs(std::uint64_t m) { macs_ += m; }

 private:
  struct Node {
    Tensor value;
    std::vector<int> inputs;
    BackwardFn backward;
    std::string op;
  };

  void check_id(int id) const {
    if (id < 0 || id >= static_cast<int>(nodes_.size())) {
      throw ContractError("graph: node id " + std::to_string(id) + " out of range");
    }
  }

  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
  std::uint64_t macs_ = 0;
};

using GraphF = GraphT<float>;
using GraphD = GraphT<double>;

// ---------------------------------------------------------------------------
// Operations. Each returns the id of a freshly emitted node.
// ---------------------------------------------------------------------------

template <typename T>
int matmul(GraphT<T>& g, int a, int b) {
  const auto& A = g.value(a);
  const auto& B = g.value(b);
  if (A.ndim() != 2 || B.ndim() != 2 || A.dim(1) != B.dim(0)) {
    throw DimensionError("matmul: incompatible shapes " + shape_str(A.shape) + " vs " + shape_str(B.shape));
  }
  const int p = A.dim(0), q = A.dim(1), r = B.dim(1);
  TensorT<T> out({p, r});
  for (int i = 0; i < p; ++i) {
    const T* arow = &A.data[static_cast<std::size_t>(i) * q];
    T* orow = &out.data[static_cast<std::size_t>(i) * r];
    for (int k = 0; k < q; ++k) {
      const T aik = arow[k];
      const T* brow = &B.data[static_cast<std::size_t>(k) * r];
      for (int j = 0; j < r; ++j) orow[j] += aik * brow[j];
    }
  }
  g.add_macs(static_cast<std::uint64_t>(p) * q * r);
  return g.emit(std::move(out), {a, b},
                [a, b, p, q, r](GraphT<T>& gr, int self) {
                  const auto& go = gr.grad(self);
                  const auto& A2 = gr.value(a);
                  const auto& B2 = gr.value(b);
                  auto& da = gr.grad_buffer(a);
                  auto& db = gr.grad_buffer(b);
                  // dA = G * B^T, rows of G and B are contiguous
                  for (int i = 0; i < p; ++i) {
                    const T* grow = &go.data[static_cast<std::size_t>(i) * r];
                    T* darow = &da.data[static_cast<std::size_t>(i) * q];
                    for (int k = 0; k < q; ++k) {
                      const T* brow = &B2.data[static_cast<std::size_t>(k) * r];
                      T acc = 0;
                      for (int j = 0; j < r; ++j) acc += grow[j] * brow[j];
                      darow[k] += acc;
                    }
                  }
                  // dB = A^T * G
                  for (int i = 0; i < p; ++i) {
                    const T* arow = &A2.data[static_cast<std::size_t>(i) * q];
                    const T* grow = &go.data[static_cast<std::size_t>(i) * r];
                    for (int k = 0; k < q; ++k) {
                      const T aik = arow[k];
                      T* dbrow = &db.data[static_cast<std::size_t>(k) * r];
                      for (int j = 0; j < r; ++j) dbrow[j] += aik * grow[j];
                    }
                  }
                },
                "matmul");
}

/// Causal temporal convolution: the sequence is zero-padded on the left with
/// k-1 rows, so out[i] depends only on x[0..i]. Tap j=k-1 reads the current
/// row, tap j=0 the row k-1 steps back.
template <typename T>
int conv1d_causal(GraphT<T>& g, int x, int w, int b) {
  const auto& X = g.value(x);
  const auto& W = g.value(w);
  const auto& B = g.value(b);
  if (X.ndim() != 2 || W.ndim() != 3) {
    throw DimensionError("conv1d_causal: want x[Nxm], w[kxmxn], got " + shape_str(X.shape) + " and " +
                         shape_str(W.shape));
  }
  const int N = X.dim(0), m = X.dim(1), k = W.dim(0), n = W.dim(2);
  if (W.dim(1) != m) {
    throw DimensionError("conv1d_causal: channel mismatch, x " + shape_str(X.shape) + " vs w " +
                         shape_str(W.shape));
  }
  if (B.ndim() != 1 || B.dim(0) != n) {
    throw DimensionError("conv1d_causal: bias " + shape_str(B.shape) + " does not match " +
                         std::to_string(n) + " output units");
  }
  TensorT<T> out({N, n});
  for (int i = 0; i < N; ++i) {
    T* orow = &out.data[static_cast<std::size_t>(i) * n];
    for (int o = 0; o < n; ++o) orow[o] = B.data[o];
  }
  std::uint64_t macs = 0;
  for (int j = 0; j < k; ++j) {
    const int delay = k - 1 - j;
    const T* wj = &W.data[static_cast<std::size_t>(j) * m * n];
    for (int i = delay; i < N; ++i) {
      const T* xrow = &X.data[static_cast<std::size_t>(i - delay) * m];
      T* orow = &out.data[static_cast<std::size_t>(i) * n];
      for (int c = 0; c < m; ++c) {
        const T xv = xrow[c];
        const T* wrow = &wj[static_cast<std::size_t>(c) * n];
        for (int o = 0; o < n; ++o) orow[o] += xv * wrow[o];
      }
    }
    if (N > delay) macs += static_cast<std::uint64_t>(N - delay) * m * n;
  }
  g.add_macs(macs);
  return g.emit(std::move(out), {x, w, b},
                [x, w, b, N, m, k, n](GraphT<T>& gr, int self) {
                  const auto& go = gr.grad(self);
                  const auto& X2 = gr.value(x);
                  const auto& W2 = gr.value(w);
                  auto& dx = gr.grad_buffer(x);
                  auto& dw = gr.grad_buffer(w);
                  auto& db = gr.grad_buffer(b);
                  for (int i = 0; i < N; ++i) {
                    const T* grow = &go.data[static_cast<std::size_t>(i) * n];
                    for (int o = 0; o < n; ++o) db.data[o] += grow[o];
                  }
                  for (int j = 0; j < k; ++j) {
                    const int delay = k - 1 - j;
                    const T* wj = &W2.data[static_cast<std::size_t>(j) * m * n];
                    T* dwj = &dw.data[static_cast<std::size_t>(j) * m * n];
                    for (int i = delay; i < N; ++i) {
                      const T* grow = &go.data[static_cast<std::size_t>(i) * n];
                      const T* xrow = &X2.data[static_cast<std::size_t>(i - delay) * m];
                      T* dxrow = &dx.data[static_cast<std::size_t>(i - delay) * m];
                      for (int c = 0; c < m; ++c) {
                        const T xv = xrow[c];
                        const T* wrow = &wj[static_cast<std::size_t>(c) * n];
                        T* dwrow = &dwj[static_cast<std::size_t>(c) * n];
                        T acc = 0;
                        for (int o = 0; o < n; ++o) {
                          dwrow[o] += xv * grow[o];
                          acc += grow[o] * wrow[o];
                        }
                        dxrow[c] += acc;
                      }
                    }
                  }
                },
                "conv1d_causal");
}

/// Broadcasts a length-n bias over the leading axis of x[Nxn]. The only
/// broadcast the library performs.
template <typename T>
int bias_add(GraphT<T>& g, int x, int b) {
  const auto& X = g.value(x);
  const auto& B = g.value(b);
  if (X.ndim() != 2 || B.ndim() != 1 || B.dim(0) != X.dim(1)) {
    throw DimensionError("bias_add: " + shape_str(X.shape) + " vs bias " + shape_str(B.shape));
  }
  const int N = X.dim(0), n = X.dim(1);
  TensorT<T> out = X;
  for (int i = 0; i < N; ++i) {
    for (int o = 0; o < n; ++o) out.data[static_cast<std::size_t>(i) * n + o] += B.data[o];
  }
  return g.emit(std::move(out), {x, b},
                [x, b, N, n](GraphT<T>& gr, int self) {
                  const auto& go = gr.grad(self);
                  auto& dx = gr.grad_buffer(x);
                  auto& db = gr.grad_buffer(b);
                  for (std::size_t i = 0; i < go.data.size(); ++i) dx.data[i] += go.data[i];
                  for (int i = 0; i < N; ++i) {
                    for (int o = 0; o < n; ++o) db.data[o] += go.data[static_cast<std::size_t>(i) * n + o];
                  }
                },
                "bias_add");
}

namespace detail {

template <typename T, typename Fwd, typename Bwd>
int binary_elementwise(GraphT<T>& g, int a, int b, Fwd fwd, Bwd bwd, const char* name) {
  const auto& A = g.value(a);
  const auto& B = g.value(b);
  check_same_shape(A, B, name);
  TensorT<T> out;
  out.shape = A.shape;
  out.data.resize(A.data.size());
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = fwd(A.data[i], B.data[i]);
  return g.emit(std::move(out), {a, b},
                [a, b, bwd](GraphT<T>& gr, int self) {
                  const auto& go = gr.grad(self);
                  const auto& A2 = gr.value(a);
                  const auto& B2 = gr.value(b);
                  auto& da = gr.grad_buffer(a);
                  auto& db = gr.grad_buffer(b);
                  for (std::size_t i = 0; i < go.data.size(); ++i) {
                    bwd(A2.data[i], B2.data[i], go.data[i], da.data[i], db.data[i]);
                  }
                },
                name);
}

}  // namespace detail

template <typename T>
int add(GraphT<T>& g, int a, int b) {
  return detail::binary_elementwise(
      g, a, b, [](T x, T y) { return x + y; },
      [](T, T, T go, T& da, T& db) {
        da += go;
        db += go;
      },
      "add");
}

template <typename T>
int sub(GraphT<T>& g, int a, int b) {
  return detail::binary_elementwise(
      g, a, b, [](T x, T y) { return x - y; },
      [](T, T, T go, T& da, T& db) {
        da += go;
        db -= go;
      },
      "sub");
}

template <typename T>
int mul(GraphT<T>& g, int a, int b) {
  return detail::binary_elementwise(
      g, a, b, [](T x, T y) { return x * y; },
      [](T x, T y, T go, T& da, T& db) {
        da += go * y;
        db += go * x;
      },
      "mul");
}

template <typename T>
int sigmoid(GraphT<T>& g, int x) {
  const auto& X = g.value(x);
  TensorT<T> out;
  out.shape = X.shape;
  out.data.resize(X.data.size());
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const T v = X.data[i];
    if (v >= 0) {
      out.data[i] = T(1) / (T(1) + std::exp(-v));
    } else {
      const T e = std::exp(v);
      out.data[i] = e / (T(1) + e);
    }
  }
  return g.emit(std::move(out), {x},
                [x](GraphT<T>& gr, int self) {
                  const auto& go = gr.grad(self);
                  const auto& y = gr.value(self);
                  auto& dx = gr.grad_buffer(x);
                  for (std::size_t i = 0; i < go.data.size(); ++i) {
                    const T s = y.data[i];
                    dx.data[i] += go.data[i] * s * (T(1) - s);
                  }
                },
                "sigmoid");
}

template <typename T>
int tanh(GraphT<T>& g, int x) {
  const auto& X = g.value(x);
  TensorT<T> out;
  out.shape = X.shape;
  out.data.resize(X.data.size());
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = std::tanh(X.data[i]);
  return g.emit(std::move(out), {x},
                [x](GraphT<T>& gr, int self) {
                  const auto& go = gr.grad(self);
                  const auto& y = gr.value(self);
                  auto& dx = gr.grad_buffer(x);
                  for (std::size_t i = 0; i < go.data.size(); ++i) {
                    dx.data[i] += go.data[i] * (T(1) - y.data[i] * y.data[i]);
                  }
                },
                "tanh");
}

template <typename T>
int relu(GraphT<T>& g, int x) {
  const auto& X = g.value(x);
  TensorT<T> out;
  out.shape = X.shape;
  out.data.resize(X.data.size());
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = X.data[i] > 0 ? X.data[i] : T(0);
  return g.emit(std::move(out), {x},
                [x](GraphT<T>& gr, int self) {
                  const auto& go = gr.grad(self);
                  const auto& X2 = gr.value(x);
                  auto& dx = gr.grad_buffer(x);
                  for (std::size_t i = 0; i < go.data.size(); ++i) {
                    if (X2.data[i] > 0) dx.data[i] += go.data[i];
                  }
                },
                "relu");
}

template <typename T>
int exp(GraphT<T>& g, int x) {
  const auto& X = g.value(x);
  TensorT<T> out;
  out.shape = X.shape;
  out.data.resize(X.data.size());
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = std::exp(X.data[i]);
  return g.emit(std::move(out), {x},
                [x](GraphT<T>& gr, int self) {
                  const auto& go = gr.grad(self);
                  const auto& y = gr.value(self);
                  auto& dx = gr.grad_buffer(x);
                  for (std::size_t i = 0; i < go.data.size(); ++i) dx.data[i] += go.data[i] * y.data[i];
                },
                "exp");
}

template <typename T>
int log(GraphT<T>& g, int x) {
  const auto& X = g.value(x);
  TensorT<T> out;
  out.shape = X.shape;
  out.data.resize(X.data.size());
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    if (!(X.data[i] > 0)) {
      throw std::domain_error("log: non-positive input " + std::to_string(static_cast<double>(X.data[i])) +
                              " at index " + std::to_string(i));
    }
    out.data[i] = std::log(X.data[i]);
  }
  return g.emit(std::move(out), {x},
                [x](GraphT<T>& gr, int self) {
                  const auto& go = gr.grad(self);
                  const auto& X2 = gr.value(x);
                  auto& dx = gr.grad_buffer(x);
                  for (std::size_t i = 0; i < go.data.size(); ++i) dx.data[i] += go.data[i] / X2.data[i];
                },
                "log");
}

template <typename T>
int scale(GraphT<T>& g, int x, double c) {
  const auto& X = g.value(x);
  TensorT<T> out;
  out.shape = X.shape;
  out.data.resize(X.data.size());
  const T cv = static_cast<T>(c);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = X.data[i] * cv;
  return g.emit(std::move(out), {x},
                [x, cv](GraphT<T>& gr, int self) {
                  const auto& go = gr.grad(self);
                  auto& dx = gr.grad_buffer(x);
                  for (std::size_t i = 0; i < go.data.size(); ++i) dx.data[i] += go.data[i] * cv;
                },
                "scale");
}

/// Per-row constant scaling of x[Nxm]; factors are not differentiated through.
template <typename T>
int row_scale(GraphT<T>& g, int x, std::vector<T> factors) {
  const auto& X = g.value(x);
  if (X.ndim() != 2 || static_cast<int>(factors.size()) != X.dim(0)) {
    throw DimensionError("row_scale: " + std::to_string(factors.size()) + " factors for " +
                         shape_str(X.shape));
  }
  const int N = X.dim(0), m = X.dim(1);
  TensorT<T> out;
  out.shape = X.shape;
  out.data.resize(X.data.size());
  for (int i = 0; i < N; ++i) {
    const T f = factors[i];
    for (int c = 0; c < m; ++c) {
      out.data[static_cast<std::size_t>(i) * m + c] = X.data[static_cast<std::size_t>(i) * m + c] * f;
    }
  }
  return g.emit(std::move(out), {x},
                [x, factors = std::move(factors), N, m](GraphT<T>& gr, int self) {
                  const auto& go = gr.grad(self);
                  auto& dx = gr.grad_buffer(x);
                  for (int i = 0; i < N; ++i) {
                    const T f = factors[i];
                    for (int c = 0; c < m; ++c) {
                      dx.data[static_cast<std::size_t>(i) * m + c] +=
                          go.data[static_cast<std::size_t>(i) * m + c] * f;
                    }
                  }
                },
                "row_scale");
}

template <typename T>
int sum(GraphT<T>& g, int x) {
  const auto& X = g.value(x);
  double acc = 0;
  for (const T& v : X.data) acc += static_cast<double>(v);
  return g.emit(TensorT<T>::scalar(static_cast<T>(acc)), {x},
                [x](GraphT<T>& gr, int self) {
                  const T go = gr.grad(self).data[0];
                  auto& dx = gr.grad_buffer(x);
                  for (auto& v : dx.data) v += go;
                },
                "sum");
}

/// Row gather from a [Vxe] table; the gradient scatters into touched rows only.
template <typename T>
int embedding_lookup(GraphT<T>& g, int table, const std::vector<int>& ids) {
  const auto& D = g.value(table);
  if (D.ndim() != 2) throw DimensionError("embed: table must be 2-D, got " + shape_str(D.shape));
  const int V = D.dim(0), e = D.dim(1);
  const int N = static_cast<int>(ids.size());
  if (N == 0) throw DimensionError("embed: empty id list");
  for (int r = 0; r < N; ++r) {
    if (ids[r] < 0 || ids[r] >= V) {
      throw DimensionError("embed: token id " + std::to_string(ids[r]) + " out of range [0," +
                           std::to_string(V) + ") at position " + std::to_string(r));
    }
  }
  TensorT<T> out({N, e});
  for (int r = 0; r < N; ++r) {
    const T* srow = &D.data[static_cast<std::size_t>(ids[r]) * e];
    T* orow = &out.data[static_cast<std::size_t>(r) * e];
    for (int c = 0; c < e; ++c) orow[c] = srow[c];
  }
  return g.emit(std::move(out), {table},
                [table, ids, e](GraphT<T>& gr, int self) {
                  const auto& go = gr.grad(self);
                  auto& dt = gr.grad_buffer(table);
                  for (std::size_t r = 0; r < ids.size(); ++r) {
                    T* drow = &dt.data[static_cast<std::size_t>(ids[r]) * e];
                    const T* grow = &go.data[r * e];
                    for (int c = 0; c < e; ++c) drow[c] += grow[c];
                  }
                },
                "embed");
}

template <typename T>
int take_rows(GraphT<T>& g, int x, const std::vector<int>& rows) {
  const auto& X = g.value(x);
  if (X.ndim() != 2) throw DimensionError("take_rows: want 2-D, got " + shape_str(X.shape));
  const int N = X.dim(0), m = X.dim(1);
  if (rows.empty()) throw DimensionError("take_rows: empty row list");
  for (int r : rows) {
    if (r < 0 || r >= N) {
      throw DimensionError("take_rows: row " + std::to_string(r) + " out of range [0," + std::to_string(N) + ")");
    }
  }
  TensorT<T> out({static_cast<int>(rows.size()), m});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const T* srow = &X.data[static_cast<std::size_t>(rows[i]) * m];
    T* orow = &out.data[i * m];
    for (int c = 0; c < m; ++c) orow[c] = srow[c];
  }
  return g.emit(std::move(out), {x},
                [x, rows, m](GraphT<T>& gr, int self) {
                  const auto& go = gr.grad(self);
                  auto& dx = gr.grad_buffer(x);
                  for (std::size_t i = 0; i < rows.size(); ++i) {
                    T* drow = &dx.data[static_cast<std::size_t>(rows[i]) * m];
                    const T* grow = &go.data[i * m];
                    for (int c = 0; c < m; ++c) drow[c] += grow[c];
                  }
                },
                "take_rows");
}

/// Places the length-M vector src at the given positions of a length-n zero
/// vector; duplicate positions accumulate.
template <typename T>
int scatter_rows(GraphT<T>& g, int src, const std::vector<int>& rows, int n) {
  const auto& S = g.value(src);
  if (S.ndim() != 1 || static_cast<int>(rows.size()) != S.dim(0)) {
    throw DimensionError("scatter_rows: " + std::to_string(rows.size()) + " positions for " +
                         shape_str(S.shape));
  }
  for (int r : rows) {
    if (r < 0 || r >= n) {
      throw DimensionError("scatter_rows: position " + std::to_string(r) + " out of range [0," +
                           std::to_string(n) + ")");
    }
  }
  TensorT<T> out({n});
  for (std::size_t i = 0; i < rows.size(); ++i) out.data[rows[i]] += S.data[i];
  return g.emit(std::move(out), {src},
                [src, rows](GraphT<T>& gr, int self) {
                  const auto& go = gr.grad(self);
                  auto& ds = gr.grad_buffer(src);
                  for (std::size_t i = 0; i < rows.size(); ++i) ds.data[i] += go.data[rows[i]];
                },
                "scatter_rows");
}

/// Stacks 2-D parts with equal column counts along the row axis.
template <typename T>
int vconcat(GraphT<T>& g, const std::vector<int>& parts) {
  if (parts.empty()) throw DimensionError("vconcat: no parts");
  const int m = g.value(parts[0]).dim(1);
  int total = 0;
  for (int p : parts) {
    const auto& P = g.value(p);
    if (P.ndim() != 2 || P.dim(1) != m) {
      throw DimensionError("vconcat: column mismatch, " + shape_str(P.shape) + " vs " + std::to_string(m) +
                           " columns");
    }
    total += P.dim(0);
  }
  TensorT<T> out({total, m});
  std::size_t off = 0;
  for (int p : parts) {
    const auto& P = g.value(p);
    for (std::size_t i = 0; i < P.data.size(); ++i) out.data[off + i] = P.data[i];
    off += P.data.size();
  }
  return g.emit(std::move(out), parts,
                [parts](GraphT<T>& gr, int self) {
                  const auto& go = gr.grad(self);
                  std::size_t off = 0;
                  for (int p : parts) {
                    auto& dp = gr.grad_buffer(p);
                    for (std::size_t i = 0; i < dp.data.size(); ++i) dp.data[i] += go.data[off + i];
                    off += dp.data.size();
                  }
                },
                "vconcat");
}

/// log p(target_i | row i) for row-wise softmax over logits[NxV], computed
/// with a max-shifted log-sum-exp accumulated in 64-bit.
template <typename T>
int row_log_prob(GraphT<T>& g, int logits, const std::vector<int>& targets) {
  const auto& L = g.value(logits);
  if (L.ndim() != 2 || static_cast<int>(targets.size()) != L.dim(0)) {
    throw DimensionError("row_log_prob: " + std::to_string(targets.size()) + " targets for " +
                         shape_str(L.shape));
  }
  const int N = L.dim(0), V = L.dim(1);
  for (int i = 0; i < N; ++i) {
    if (targets[i] < 0 || targets[i] >= V) {
      throw DimensionError("row_log_prob: target id " + std::to_string(targets[i]) + " out of range [0," +
                           std::to_string(V) + ") at row " + std::to_string(i));
    }
  }
  TensorT<T> out({N});
  for (int i = 0; i < N; ++i) {
    const T* row = &L.data[static_cast<std::size_t>(i) * V];
    double mx = static_cast<double>(row[0]);
    for (int j = 1; j < V; ++j) mx = std::max(mx, static_cast<double>(row[j]));
    double s = 0;
    for (int j = 0; j < V; ++j) s += std::exp(static_cast<double>(row[j]) - mx);
    out.data[i] = static_cast<T>(static_cast<double>(row[targets[i]]) - (mx + std::log(s)));
  }
  return g.emit(std::move(out), {logits},
                [logits, targets, N, V](GraphT<T>& gr, int self) {
                  const auto& go = gr.grad(self);
                  const auto& L2 = gr.value(logits);
                  auto& dl = gr.grad_buffer(logits);
                  for (int i = 0; i < N; ++i) {
                    const T gv = go.data[i];
                    if (gv == T(0)) continue;
                    const T* row = &L2.data[static_cast<std::size_t>(i) * V];
                    T* drow = &dl.data[static_cast<std::size_t>(i) * V];
                    double mx = static_cast<double>(row[0]);
                    for (int j = 1; j < V; ++j) mx = std::max(mx, static_cast<double>(row[j]));
                    double s = 0;
                    for (int j = 0; j < V; ++j) s += std::exp(static_cast<double>(row[j]) - mx);
                    for (int j = 0; j < V; ++j) {
                      const double p = std::exp(static_cast<double>(row[j]) - mx) / s;
                      drow[j] -= gv * static_cast<T>(p);
                    }
                    drow[targets[i]] += gv;
                  }
                },
                "row_log_prob");
}

// ---------------------------------------------------------------------------
// Pointwise dispatch by kind, the generic elementwise entry point.
// ---------------------------------------------------------------------------

enum class EwKind { Sigmoid, Tanh, Relu, Exp, Log, Mul, Add, Sub };

inline const char* to_string(EwKind k) {
  switch (k) {
    case EwKind::Sigmoid: return "sigmoid";
    case EwKind::Tanh: return "tanh";
    case EwKind::Relu: return "relu";
    case EwKind::Exp: return "exp";
    case EwKind::Log: return "log";
    case EwKind::Mul: return "mul";
    case EwKind::Add: return "add";
    case EwKind::Sub: return "sub";
  }
  return "?";
}

inline bool is_binary(EwKind k) { return k == EwKind::Mul || k == EwKind::Add || k == EwKind::Sub; }

template <typename T>
int elementwise(GraphT<T>& g, EwKind kind, int a, int b = -1) {
  if (is_binary(kind) != (b >= 0)) {
    throw ContractError(std::string("elementwise: ") + to_string(kind) +
                        (is_binary(kind) ? " needs two arguments" : " takes one argument"));
  }
  switch (kind) {
    case EwKind::Sigmoid: return sigmoid(g, a);
    case EwKind::Tanh: return tanh(g, a);
    case EwKind::Relu: return relu(g, a);
    case EwKind::Exp: return exp(g, a);
    case EwKind::Log: return log(g, a);
    case EwKind::Mul: return mul(g, a, b);
    case EwKind::Add: return add(g, a, b);
    case EwKind::Sub: return sub(g, a, b);
  }
  throw ContractError("elementwise: unknown kind");
}

}  // namespace glunet
