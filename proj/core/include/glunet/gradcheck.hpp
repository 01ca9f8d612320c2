#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "glunet/graph.hpp"
#include "glunet/tensor.hpp"

namespace glunet {

/// Wires a scalar loss from the given leaf id on a fresh 64-bit graph.
using LossBuilder = std::function<int(GraphT<double>&, int)>;

/// Central-difference oracle: compares reverse-mode dloss/dx against
/// (f(x+eps e_i) - f(x-eps e_i)) / 2eps per coordinate, everything in 64-bit.
/// Returns the largest relative error over all coordinates.
inline double finite_diff_max_rel_err(const LossBuilder& build, const TensorD& x, double eps = 1e-5) {
  if (!(eps > 0)) throw ContractError("finite_diff: eps must be positive");

  GraphD g;
  const int xid = g.leaf(x, "x");
  const int loss = build(g, xid);
  if (g.value(loss).numel() != 1) {
    throw ContractError("finite_diff: loss must be scalar, got " + shape_str(g.value(loss).shape));
  }
  g.backward(loss);
  const TensorD analytic = g.grad(xid);

  auto eval = [&](const TensorD& point) {
    GraphD ge;
    ge.grad_enabled = false;
    return ge.value(build(ge, ge.leaf(point, "x"))).data[0];
  };

  double worst = 0;
  TensorD probe = x;
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    const double saved = probe.data[i];
    probe.data[i] = saved + eps;
    const double fp = eval(probe);
    probe.data[i] = saved - eps;
    const double fm = eval(probe);
    probe.data[i] = saved;
    const double fd = (fp - fm) / (2 * eps);
    const double ad = analytic.data[i];
    // The floor keeps central-difference roundoff on true-zero gradients
    // from registering as relative error.
    const double denom = std::max({std::abs(ad), std::abs(fd), 1e-3});
    worst = std::max(worst, std::abs(ad - fd) / denom);
  }
  return worst;
}

}  // namespace glunet
