#pragma once

#include <cmath>
#include <random>

#include "glunet/tensor.hpp"

namespace glunet {

using Rng = std::mt19937_64;

template <typename T>
TensorT<T> normal_tensor(Rng& rng, std::vector<int> shape, double mean, double sd) {
  TensorT<T> t(std::move(shape));
  std::normal_distribution<double> dist(mean, sd);
  for (auto& v : t.data) v = static_cast<T>(dist(rng));
  return t;
}

template <typename T>
TensorT<T> uniform_tensor(Rng& rng, std::vector<int> shape, double lo, double hi) {
  TensorT<T> t(std::move(shape));
  std::uniform_real_distribution<double> dist(lo, hi);
  for (auto& v : t.data) v = static_cast<T>(dist(rng));
  return t;
}

/// Zero-mean normal with variance 2/fan_in. For a [kxmxn] convolution kernel
/// fan_in is k*m; for a linear map it is the input width.
template <typename T>
TensorT<T> kaiming_tensor(Rng& rng, std::vector<int> shape, int fan_in) {
  if (fan_in < 1) throw ContractError("kaiming init: fan_in must be >= 1");
  return normal_tensor<T>(rng, std::move(shape), 0.0, std::sqrt(2.0 / fan_in));
}

}  // namespace glunet
