#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "glunet/param.hpp"

namespace glunet {

constexpr double kGradTolerance = 1e-4;

struct GradCheckEntry {
  std::string name;
  double max_rel_err = 0;
};

/// Central-difference check of dloss/dparam for every trainable slot of the
/// given parameters (v, and g when weight-normed), against gradients the
/// caller has already backpropagated into them. 64-bit throughout.
double fd_check_parameters(const std::function<double()>& loss_value,
                           const std::vector<ParameterT<double>*>& params, double eps = 1e-5);

/// Runs the full gradient-check suite: every differentiable operation plus
/// the layer, head and weight-norm composites, ten random instances each.
/// Every entry must come in under kGradTolerance.
std::vector<GradCheckEntry> run_gradcheck_suites(std::uint64_t seed);

}  // namespace glunet
