#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "glunet/tensor.hpp"

namespace glunet {

/// Per-output-unit L2 norms. The output unit axis is the last one; the norm
/// runs over everything else, so a [kxmxn] kernel yields n norms.
template <typename T>
std::vector<double> unit_norms(const TensorT<T>& v) {
  const int n = v.shape.back();
  const std::size_t rows = v.numel() / n;
  std::vector<double> norms(n, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = &v.data[r * n];
    for (int o = 0; o < n; ++o) norms[o] += static_cast<double>(row[o]) * static_cast<double>(row[o]);
  }
  for (auto& x : norms) x = std::sqrt(x);
  return norms;
}

/// A trainable quantity. Plain parameters hold one tensor; weight-normalized
/// ones hold a direction v and a per-unit scale g and materialize
/// w = g * v / ||v|| on demand. Gradient and momentum buffers match.
template <typename T>
struct ParameterT {
  std::string name;
  bool weight_normed = false;
  TensorT<T> v;       // direction, or the plain value
  TensorT<T> g;       // per-unit scale; empty when plain
  TensorT<T> grad_v, grad_g;
  TensorT<T> mom_v, mom_g;

  static ParameterT plain(std::string name, TensorT<T> value) {
    ParameterT p;
    p.name = std::move(name);
    p.weight_normed = false;
    p.v = std::move(value);
    p.alloc_buffers();
    return p;
  }

  /// Wraps an initial weight; g starts at the per-unit norm of v so the
  /// materialized w equals the initial draw.
  static ParameterT normed(std::string name, TensorT<T> value) {
    ParameterT p;
    p.name = std::move(name);
    p.weight_normed = true;
    p.v = std::move(value);
    const auto norms = unit_norms(p.v);
    p.g = TensorT<T>({p.v.shape.back()});
    for (std::size_t o = 0; o < norms.size(); ++o) {
      if (!(norms[o] > 0)) throw ContractError("weight norm: zero-norm unit " + std::to_string(o) + " in " + p.name);
      p.g.data[o] = static_cast<T>(norms[o]);
    }
    p.alloc_buffers();
    return p;
  }

  void alloc_buffers() {
    grad_v = TensorT<T>::zeros(v.shape);
    mom_v = TensorT<T>::zeros(v.shape);
    if (weight_normed) {
      grad_g = TensorT<T>::zeros(g.shape);
      mom_g = TensorT<T>::zeros(g.shape);
    }
  }

  TensorT<T> materialize() const {
    if (!weight_normed) return v;
    const int n = v.shape.back();
    const std::size_t rows = v.numel() / n;
    const auto norms = unit_norms(v);
    TensorT<T> w;
    w.shape = v.shape;
    w.data.resize(v.data.size());
    for (int o = 0; o < n; ++o) {
      if (!(norms[o] > 0)) throw ContractError("weight norm: zero-norm unit " + std::to_string(o) + " in " + name);
    }
    for (std::size_t r = 0; r < rows; ++r) {
      for (int o = 0; o < n; ++o) {
        w.data[r * n + o] = static_cast<T>(static_cast<double>(g.data[o]) / norms[o]) * v.data[r * n + o];
      }
    }
    return w;
  }

  /// Folds dLoss/dw into the trainable gradients. Plain: grad_v += dw.
  /// Weight-normed: chain rule through w = g*v/||v||,
  ///   dg[o]    = <dw_o, v_o> / ||v_o||
  ///   dv[.,o]  = (g[o]/||v_o||) * (dw[.,o] - (<dw_o, v_o>/||v_o||^2) v[.,o])
  void add_weight_grad(const TensorT<T>& dw) {
    check_same_shape(dw, v, "add_weight_grad");
    if (!weight_normed) {
      for (std::size_t i = 0; i < dw.data.size(); ++i) grad_v.data[i] += dw.data[i];
      return;
    }
    const int n = v.shape.back();
    const std::size_t rows = v.numel() / n;
    const auto norms = unit_norms(v);
    std::vector<double> dots(n, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      for (int o = 0; o < n; ++o) {
        dots[o] += static_cast<double>(dw.data[r * n + o]) * static_cast<double>(v.data[r * n + o]);
      }
    }
    for (int o = 0; o < n; ++o) grad_g.data[o] += static_cast<T>(dots[o] / norms[o]);
    for (std::size_t r = 0; r < rows; ++r) {
      for (int o = 0; o < n; ++o) {
        const double gn = static_cast<double>(g.data[o]) / norms[o];
        const double centered = static_cast<double>(dw.data[r * n + o]) -
                                dots[o] / (norms[o] * norms[o]) * static_cast<double>(v.data[r * n + o]);
        grad_v.data[r * n + o] += static_cast<T>(gn * centered);
      }
    }
  }

  void zero_grad() {
    for (auto& x : grad_v.data) x = T(0);
    for (auto& x : grad_g.data) x = T(0);
  }

  std::size_t param_count() const { return v.numel() + g.numel(); }

  struct Slot {
    TensorT<T>* value;
    TensorT<T>* grad;
    TensorT<T>* momentum;
  };

  std::vector<Slot> slots() {
    std::vector<Slot> out;
    out.push_back({&v, &grad_v, &mom_v});
    if (weight_normed) out.push_back({&g, &grad_g, &mom_g});
    return out;
  }
};

using ParameterF = ParameterT<float>;
using ParameterD = ParameterT<double>;

}  // namespace glunet
