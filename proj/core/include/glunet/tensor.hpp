#pragma once

#include <cstddef>
#include <cstdint>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace glunet {

/// Shape or argument mismatch between tensors.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A caller broke an operation's contract (non-scalar loss, all-masked batch, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline std::string shape_str(const std::vector<int>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

/// Dense row-major tensor. product(shape) == data.size() always holds.
template <typename T>
struct TensorT {
  std::vector<int> shape;
  std::vector<T> data;

  TensorT() = default;

  explicit TensorT(std::vector<int> s) : shape(std::move(s)) {
    data.assign(checked_numel(shape), T(0));
  }

  TensorT(std::vector<int> s, std::vector<T> values) : shape(std::move(s)), data(std::move(values)) {
    if (checked_numel(shape) != data.size()) {
      throw DimensionError("tensor: " + shape_str(shape) + " does not hold " +
                           std::to_string(data.size()) + " values");
    }
  }

  static TensorT zeros(std::vector<int> s) { return TensorT(std::move(s)); }

  static TensorT full(std::vector<int> s, T value) {
    TensorT t(std::move(s));
    for (auto& x : t.data) x = value;
    return t;
  }

  static TensorT scalar(T value) { return TensorT({1}, {value}); }

  bool empty() const { return data.empty(); }
  std::size_t numel() const { return data.size(); }
  int ndim() const { return static_cast<int>(shape.size()); }

  int dim(int i) const {
    if (i < 0 || i >= ndim()) throw DimensionError("tensor: dim " + std::to_string(i) + " of " + shape_str(shape));
    return shape[i];
  }

  T& at(int i) { return data[static_cast<std::size_t>(i)]; }
  const T& at(int i) const { return data[static_cast<std::size_t>(i)]; }

  T& at(int i, int j) { return data[static_cast<std::size_t>(i) * shape[1] + j]; }
  const T& at(int i, int j) const { return data[static_cast<std::size_t>(i) * shape[1] + j]; }

  T& at(int i, int j, int k) {
    return data[(static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k];
  }
  const T& at(int i, int j, int k) const {
    return data[(static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k];
  }

  bool same_shape(const TensorT& other) const { return shape == other.shape; }

  bool all_finite() const {
    for (const T& x : data) {
      if (!std::isfinite(static_cast<double>(x))) return false;
    }
    return true;
  }

  template <typename U>
  TensorT<U> cast() const {
    TensorT<U> out;
    out.shape = shape;
    out.data.reserve(data.size());
    for (const T& x : data) out.data.push_back(static_cast<U>(x));
    return out;
  }

 private:
  static std::size_t checked_numel(const std::vector<int>& s) {
    std::size_t n = 1;
    for (int e : s) {
      if (e <= 0) throw DimensionError("tensor: non-positive extent in " + shape_str(s));
      n *= static_cast<std::size_t>(e);
    }
    return n;
  }
};

using TensorF = TensorT<float>;
using TensorD = TensorT<double>;

template <typename T>
void check_same_shape(const TensorT<T>& a, const TensorT<T>& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape) + " vs " +
                         shape_str(b.shape));
  }
}

}  // namespace glunet
