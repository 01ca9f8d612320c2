#pragma once

#include <cmath>
#include <vector>

#include "glunet/param.hpp"

namespace glunet {

struct OptimizerConfig {
  double learning_rate = 1.0;
  double momentum = 0.99;
  double clip_threshold = 0.1;

  void validate() const {
    if (!(learning_rate > 0)) throw ContractError("optimizer: learning rate must be positive");
    if (momentum < 0 || momentum >= 1) throw ContractError("optimizer: momentum must be in [0,1)");
    if (!(clip_threshold > 0)) throw ContractError("optimizer: clip threshold must be positive");
  }
};

template <typename T>
double global_grad_norm(const std::vector<ParameterT<T>*>& params) {
  double sq = 0;
  for (auto* p : params) {
    for (const T& x : p->grad_v.data) sq += static_cast<double>(x) * static_cast<double>(x);
    for (const T& x : p->grad_g.data) sq += static_cast<double>(x) * static_cast<double>(x);
  }
  return std::sqrt(sq);
}

/// Spherical trust region: caps the global L2 norm of the concatenated
/// gradient at eps, preserving direction. Returns the pre-clip norm.
template <typename T>
double clip_global(const std::vector<ParameterT<T>*>& params, double eps) {
  if (!(eps > 0)) throw ContractError("clip: eps must be positive");
  const double norm = global_grad_norm(params);
  if (norm > eps) {
    const T s = static_cast<T>(eps / norm);
    for (auto* p : params) {
      for (T& x : p->grad_v.data) x *= s;
      for (T& x : p->grad_g.data) x *= s;
    }
  }
  return norm;
}

/// Nesterov momentum in the lookahead-on-the-update form:
///   buf   <- mu*buf - lr*grad
///   param <- param + mu*buf - lr*grad
/// Momentum buffers start at zero; mu = 0 reduces to plain SGD.
template <typename T>
void nesterov_step(const std::vector<ParameterT<T>*>& params, const OptimizerConfig& cfg) {
  cfg.validate();
  const T lr = static_cast<T>(cfg.learning_rate);
  const T mu = static_cast<T>(cfg.momentum);
  for (auto* p : params) {
    for (auto slot : p->slots()) {
      auto& value = slot.value->data;
      auto& grad = slot.grad->data;
      auto& mom = slot.momentum->data;
      for (std::size_t i = 0; i < value.size(); ++i) {
        mom[i] = mu * mom[i] - lr * grad[i];
        value[i] += mu * mom[i] - lr * grad[i];
      }
    }
  }
}

}  // namespace glunet
