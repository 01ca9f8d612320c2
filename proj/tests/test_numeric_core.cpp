#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "glunet/gradcheck.hpp"
#include "glunet/graph.hpp"
#include "glunet/init.hpp"
#include "glunet/tensor.hpp"

namespace glunet {
namespace {

template <typename T>
void expect_tensor_near(const TensorT<T>& got, const TensorT<T>& want, double tol) {
  ASSERT_EQ(got.shape, want.shape);
  for (std::size_t i = 0; i < got.data.size(); ++i) {
    EXPECT_NEAR(static_cast<double>(got.data[i]), static_cast<double>(want.data[i]), tol) << "at " << i;
  }
}

TensorD identity_matrix(int n) {
  TensorD m({n, n});
  for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

TEST(Tensor, ShapeInvariants) {
  EXPECT_THROW(TensorD({3, 0}), DimensionError);
  EXPECT_THROW(TensorD({2, 2}, {1.0, 2.0, 3.0}), DimensionError);
  const TensorD t({2, 3});
  EXPECT_EQ(t.numel(), 6u);
}

TEST(Matmul, IdentityTimesMatrix) {
  Rng rng(7);
  const TensorD M = uniform_tensor<double>(rng, {3, 4}, -2, 2);
  GraphD g;
  const int out = matmul(g, g.leaf(identity_matrix(3)), g.leaf(M));
  expect_tensor_near(g.value(out), M, 0.0);
}

TEST(Matmul, HandComputedSum) {
  GraphD g;
  const int a = g.leaf(TensorD({2, 2}, {1, 2, 3, 4}));
  const int b = g.leaf(TensorD({2, 1}, {1, 1}));
  const int out = matmul(g, a, b);
  expect_tensor_near(g.value(out), TensorD({2, 1}, {3, 7}), 0.0);
}

TEST(Matmul, GradientsMatchFiniteDifferences) {
  Rng rng(11);
  const TensorD A = uniform_tensor<double>(rng, {4, 5}, -1, 1);
  const TensorD B = uniform_tensor<double>(rng, {5, 2}, -1, 1);
  const double err_a = finite_diff_max_rel_err(
      [&](GraphD& g, int x) { return sum(g, tanh(g, matmul(g, x, g.leaf(B)))); }, A);
  const double err_b = finite_diff_max_rel_err(
      [&](GraphD& g, int x) { return sum(g, tanh(g, matmul(g, g.leaf(A), x))); }, B);
  EXPECT_LT(err_a, 1e-4);
  EXPECT_LT(err_b, 1e-4);
}

TEST(Matmul, ShapeMismatchNamesBothShapes) {
  GraphD g;
  const int a = g.leaf(TensorD({2, 3}));
  const int b = g.leaf(TensorD({4, 2}));
  try {
    matmul(g, a, b);
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2x3]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[4x2]"), std::string::npos) << msg;
  }
}

// Brute-force convolution straight from the padding definition:
// out[i] = b + sum_j x_padded[i+j] . w[j], where x_padded prepends k-1 zero
// rows. Independent of the implementation's loop structure.
TensorD conv_oracle(const TensorD& x, const TensorD& w, const TensorD& b) {
  const int N = x.dim(0), m = x.dim(1), k = w.dim(0), n = w.dim(2);
  TensorD out({N, n});
  for (int i = 0; i < N; ++i) {
    for (int o = 0; o < n; ++o) {
      double acc = b.at(o);
      for (int j = 0; j < k; ++j) {
        const int src = i + j - (k - 1);
        if (src < 0) continue;
        for (int c = 0; c < m; ++c) acc += x.at(src, c) * w.at(j, c, o);
      }
      out.at(i, o) = acc;
    }
  }
  return out;
}

TEST(CausalConv, CurrentTokenTapIsIdentity) {
  Rng rng(3);
  const TensorD X = uniform_tensor<double>(rng, {5, 3}, -1, 1);
  TensorD W({2, 3, 3});
  for (int c = 0; c < 3; ++c) W.at(1, c, c) = 1.0;  // tap j = k-1 reads the current row
  GraphD g;
  const int out = conv1d_causal(g, g.leaf(X), g.leaf(W), g.leaf(TensorD({3})));
  expect_tensor_near(g.value(out), X, 0.0);
}

TEST(CausalConv, OldestTapIsPureDelay) {
  Rng rng(4);
  const TensorD X = uniform_tensor<double>(rng, {6, 2}, -1, 1);
  TensorD W({3, 2, 2});
  for (int c = 0; c < 2; ++c) W.at(0, c, c) = 1.0;  // tap j = 0 reads the row k-1 back
  GraphD g;
  const int out = conv1d_causal(g, g.leaf(X), g.leaf(W), g.leaf(TensorD({2})));
  const auto& O = g.value(out);
  for (int c = 0; c < 2; ++c) {
    EXPECT_EQ(O.at(0, c), 0.0);
    EXPECT_EQ(O.at(1, c), 0.0);
  }
  for (int i = 2; i < 6; ++i) {
    for (int c = 0; c < 2; ++c) EXPECT_EQ(O.at(i, c), X.at(i - 2, c));
  }
}

TEST(CausalConv, MatchesBruteForceOracleExactly) {
  Rng rng(5);
  const TensorD X = uniform_tensor<double>(rng, {6, 2}, -1, 1);
  const TensorD W = uniform_tensor<double>(rng, {2, 2, 3}, -1, 1);
  const TensorD B = uniform_tensor<double>(rng, {3}, -1, 1);
  GraphD g;
  const int out = conv1d_causal(g, g.leaf(X), g.leaf(W), g.leaf(B));
  expect_tensor_near(g.value(out), conv_oracle(X, W, B), 1e-15);
}

TEST(CausalConv, GradientsMatchFiniteDifferences) {
  Rng rng(6);
  const TensorD X = uniform_tensor<double>(rng, {6, 2}, -1, 1);
  const TensorD W = uniform_tensor<double>(rng, {2, 2, 3}, -1, 1);
  const TensorD B = uniform_tensor<double>(rng, {3}, -1, 1);
  auto loss = [](GraphD& g, int x, int w, int b) { return sum(g, tanh(g, conv1d_causal(g, x, w, b))); };
  EXPECT_LT(finite_diff_max_rel_err([&](GraphD& g, int x) { return loss(g, x, g.leaf(W), g.leaf(B)); }, X),
            1e-4);
  EXPECT_LT(finite_diff_max_rel_err([&](GraphD& g, int w) { return loss(g, g.leaf(X), w, g.leaf(B)); }, W),
            1e-4);
  EXPECT_LT(finite_diff_max_rel_err([&](GraphD& g, int b) { return loss(g, g.leaf(X), g.leaf(W), b); }, B),
            1e-4);
}

TEST(CausalConv, KernelWiderThanSequenceIsAllowed) {
  Rng rng(8);
  const TensorD X = uniform_tensor<double>(rng, {2, 2}, -1, 1);
  const TensorD W = uniform_tensor<double>(rng, {5, 2, 2}, -1, 1);
  GraphD g;
  const int out = conv1d_causal(g, g.leaf(X), g.leaf(W), g.leaf(TensorD({2})));
  expect_tensor_near(g.value(out), conv_oracle(X, W, TensorD({2})), 1e-15);
}

TEST(CausalConv, ChannelMismatchThrows) {
  GraphD g;
  const int x = g.leaf(TensorD({4, 3}));
  const int w = g.leaf(TensorD({2, 2, 3}));
  const int b = g.leaf(TensorD({3}));
  EXPECT_THROW(conv1d_causal(g, x, w, b), DimensionError);
}

TEST(CausalConv, FuturePerturbationLeavesOutputBitIdentical) {
  Rng rng(9);
  const TensorD X = uniform_tensor<double>(rng, {8, 3}, -1, 1);
  const TensorD W = uniform_tensor<double>(rng, {3, 3, 2}, -1, 1);
  const TensorD B = uniform_tensor<double>(rng, {2}, -1, 1);
  GraphD g;
  const TensorD base = g.value(conv1d_causal(g, g.leaf(X), g.leaf(W), g.leaf(B)));
  for (int j = 1; j < 8; ++j) {
    TensorD perturbed = X;
    for (int c = 0; c < 3; ++c) perturbed.at(j, c) += 10.0;
    GraphD g2;
    const TensorD& out = g2.value(conv1d_causal(g2, g2.leaf(perturbed), g2.leaf(W), g2.leaf(B)));
    for (int i = 0; i < j; ++i) {
      for (int o = 0; o < 2; ++o) {
        EXPECT_EQ(out.at(i, o), base.at(i, o)) << "i=" << i << " j=" << j;
      }
    }
  }
}

TEST(Elementwise, SigmoidOfZeroIsHalf) {
  GraphD g;
  const int out = sigmoid(g, g.leaf(TensorD({3}, {0.0, 0.0, 0.0})));
  for (double v : g.value(out).data) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(Elementwise, MulByOnesIsIdentity) {
  Rng rng(10);
  const TensorD X = uniform_tensor<double>(rng, {4, 2}, -3, 3);
  GraphD g;
  const int out = mul(g, g.leaf(X), g.leaf(TensorD::full({4, 2}, 1.0)));
  expect_tensor_near(g.value(out), X, 0.0);
}

TEST(Elementwise, TanhGradientMatchesFiniteDifferences) {
  Rng rng(12);
  for (int i = 0; i < 5; ++i) {
    const TensorD X = uniform_tensor<double>(rng, {3, 3}, -2, 2);
    EXPECT_LT(finite_diff_max_rel_err([&](GraphD& g, int x) { return sum(g, tanh(g, x)); }, X), 1e-4);
  }
}

TEST(Elementwise, LogRejectsNonPositive) {
  GraphD g;
  EXPECT_THROW(log(g, g.leaf(TensorD({2}, {1.0, -0.5}))), std::domain_error);
  EXPECT_THROW(log(g, g.leaf(TensorD({1}, {0.0}))), std::domain_error);
}

TEST(Elementwise, BinaryKindsRejectShapeMismatch) {
  GraphD g;
  const int a = g.leaf(TensorD({2, 2}));
  const int b = g.leaf(TensorD({4}));
  EXPECT_THROW(add(g, a, b), DimensionError);
  EXPECT_THROW(elementwise(g, EwKind::Mul, a, b), DimensionError);
}

TEST(Elementwise, DispatcherChecksArity) {
  GraphD g;
  const int a = g.leaf(TensorD({2}));
  EXPECT_THROW(elementwise(g, EwKind::Sigmoid, a, a), ContractError);
  EXPECT_THROW(elementwise(g, EwKind::Add, a), ContractError);
}

TEST(Backward, SumGradientIsAllOnes) {
  Rng rng(13);
  GraphD g;
  const int x = g.leaf(uniform_tensor<double>(rng, {3, 4}, -1, 1));
  g.backward(sum(g, x));
  for (double v : g.grad(x).data) EXPECT_DOUBLE_EQ(v, 1.0);
}

// Gradient identity for x (x) sigmoid(x): sigma(x) + x*sigma(x)*(1-sigma(x)).
TEST(Backward, GatedLinearGradientIdentity) {
  Rng rng(14);
  const TensorD X = uniform_tensor<double>(rng, {5, 3}, -3, 3);
  GraphD g;
  const int x = g.leaf(X);
  g.backward(sum(g, mul(g, x, sigmoid(g, x))));
  const auto& grad = g.grad(x);
  for (std::size_t i = 0; i < X.data.size(); ++i) {
    const double s = 1.0 / (1.0 + std::exp(-X.data[i]));
    const double want = s + X.data[i] * s * (1.0 - s);
    EXPECT_NEAR(grad.data[i], want, 1e-10);
  }
}

// Gradient of tanh(x) (x) sigmoid(x): tanh'(x)*sigma(x) + sigma'(x)*tanh(x).
TEST(Backward, GatedTanhGradientIdentity) {
  Rng rng(15);
  const TensorD X = uniform_tensor<double>(rng, {5, 3}, -3, 3);
  GraphD g;
  const int x = g.leaf(X);
  g.backward(sum(g, mul(g, tanh(g, x), sigmoid(g, x))));
  const auto& grad = g.grad(x);
  for (std::size_t i = 0; i < X.data.size(); ++i) {
    const double t = std::tanh(X.data[i]);
    const double s = 1.0 / (1.0 + std::exp(-X.data[i]));
    const double want = (1.0 - t * t) * s + s * (1.0 - s) * t;
    EXPECT_NEAR(grad.data[i], want, 1e-10);
  }
}

TEST(Backward, NonScalarLossRejected) {
  GraphD g;
  const int x = g.leaf(TensorD({2, 2}));
  EXPECT_THROW(g.backward(x), ContractError);
}

TEST(Backward, DeterministicAcrossRuns) {
  auto run = [](std::uint64_t seed) {
    Rng rng(seed);
    GraphD g;
    const int x = g.leaf(uniform_tensor<double>(rng, {6, 4}, -1, 1));
    const int w = g.leaf(uniform_tensor<double>(rng, {3, 4, 4}, -1, 1));
    const int b = g.leaf(uniform_tensor<double>(rng, {4}, -1, 1));
    const int out = mul(g, conv1d_causal(g, x, w, b), sigmoid(g, conv1d_causal(g, x, w, b)));
    g.backward(sum(g, out));
    return std::make_pair(g.value(out).data, g.grad(x).data);
  };
  const auto [v1, g1] = run(42);
  const auto [v2, g2] = run(42);
  EXPECT_EQ(v1, v2);
  EXPECT_EQ(g1, g2);
}

TEST(FiniteDiff, LinearFunctionHasZeroError) {
  // Integer grid and a power-of-two step keep every sum exact in binary.
  const TensorD X({2, 3}, {1, 2, 3, 4, 5, 6});
  const double err = finite_diff_max_rel_err([](GraphD& g, int x) { return sum(g, x); }, X, 0.25);
  EXPECT_EQ(err, 0.0);
}

TEST(FiniteDiff, SumOfSigmoid) {
  Rng rng(16);
  const TensorD X = uniform_tensor<double>(rng, {4, 4}, -2, 2);
  EXPECT_LT(finite_diff_max_rel_err([](GraphD& g, int x) { return sum(g, sigmoid(g, x)); }, X, 1e-5), 1e-4);
}

TEST(FiniteDiff, RejectsNonPositiveEps) {
  const TensorD X({1}, {1.0});
  EXPECT_THROW(finite_diff_max_rel_err([](GraphD& g, int x) { return sum(g, x); }, X, 0.0), ContractError);
}

TEST(Graph, GradBeforeBackwardThrows) {
  GraphD g;
  const int x = g.leaf(TensorD({2}));
  EXPECT_THROW(g.grad(x), ContractError);
}

TEST(Graph, MacCountTracksMatmulWork) {
  GraphD g;
  const int a = g.leaf(TensorD({3, 4}));
  const int b = g.leaf(TensorD({4, 5}));
  matmul(g, a, b);
  EXPECT_EQ(g.macs(), 3u * 4u * 5u);
}

TEST(Elementwise, ForwardStaysFiniteOnFiniteInputs) {
  Rng rng(17);
  const TensorD X = uniform_tensor<double>(rng, {8, 8}, -30, 30);
  GraphD g;
  const int x = g.leaf(X);
  EXPECT_TRUE(g.value(sigmoid(g, x)).all_finite());
  EXPECT_TRUE(g.value(tanh(g, x)).all_finite());
  EXPECT_TRUE(g.value(relu(g, x)).all_finite());
}

}  // namespace
}  // namespace glunet
