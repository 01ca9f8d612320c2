#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "glunet/model.hpp"
#include "glunet/presets.hpp"
#include "test_util.hpp"

namespace glunet {
namespace {

using test::conv_oracle;
using test::expect_tensor_near;
using test::measured_receptive_field;
using test::model_states;
using test::random_ids;

TEST(Embed, RepeatedTokensShareRows) {
  Rng rng(1);
  const TensorD table = uniform_tensor<double>(rng, {5, 3}, -1, 1);
  GraphD g;
  const int out = embedding_lookup(g, g.leaf(table), {0, 0});
  const auto& O = g.value(out);
  for (int c = 0; c < 3; ++c) {
    EXPECT_EQ(O.at(0, c), O.at(1, c));
    EXPECT_EQ(O.at(0, c), table.at(0, c));
  }
}

TEST(Embed, OneHotTableGivesOneHotRows) {
  TensorD table({4, 4});
  for (int i = 0; i < 4; ++i) table.at(i, i) = 1.0;
  GraphD g;
  const int out = embedding_lookup(g, g.leaf(table), {2, 0, 3});
  const auto& O = g.value(out);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) {
      const int hot = r == 0 ? 2 : r == 1 ? 0 : 3;
      EXPECT_EQ(O.at(r, c), c == hot ? 1.0 : 0.0);
    }
  }
}

TEST(Embed, OutOfRangeNamesPosition) {
  GraphD g;
  const int table = g.leaf(TensorD({3, 2}));
  try {
    embedding_lookup(g, table, {0, 7, 1});
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("7"), std::string::npos);
    EXPECT_NE(msg.find("position 1"), std::string::npos) << msg;
  }
}

// Gather gradient equals the gradient of the dense one-hot matmul that
// computes the same rows.
TEST(Embed, GradientMatchesDenseOneHotMatmul) {
  Rng rng(2);
  const TensorD table = uniform_tensor<double>(rng, {6, 4}, -1, 1);
  const std::vector<int> ids = {1, 4, 1, 0};

  GraphD g;
  const int t1 = g.leaf(table);
  g.backward(sum(g, embedding_lookup(g, t1, ids)));
  const TensorD gather_grad = g.grad(t1);

  TensorD onehot({4, 6});
  for (std::size_t r = 0; r < ids.size(); ++r) onehot.at(static_cast<int>(r), ids[r]) = 1.0;
  GraphD g2;
  const int t2 = g2.leaf(table);
  g2.backward(sum(g2, matmul(g2, g2.leaf(onehot), t2)));
  expect_tensor_near(gather_grad, g2.grad(t2), 0.0);

  // untouched rows stay zero
  for (int c = 0; c < 4; ++c) {
    EXPECT_EQ(gather_grad.at(2, c), 0.0);
    EXPECT_EQ(gather_grad.at(3, c), 0.0);
    EXPECT_EQ(gather_grad.at(5, c), 0.0);
  }
}

TEST(GatedLayer, GluWithZeroGatePathHalvesLinearPath) {
  Rng rng(3);
  auto layer = GatedConvLayerT<double>::init(GateKind::GLU, 3, 4, 5, rng, false, "l");
  for (auto& x : layer.v.v.data) x = 0.0;
  for (auto& x : layer.c.v.data) x = 0.0;
  const TensorD X = uniform_tensor<double>(rng, {6, 4}, -1, 1);

  GraphD g;
  ParamBinder<double> binder(g);
  const TensorD out = g.value(layer.forward(g, binder, g.leaf(X)));
  const TensorD lin = conv_oracle(X, layer.w.v, layer.b.v);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    EXPECT_NEAR(out.data[i], 0.5 * lin.data[i], 1e-12);
  }
}

TEST(GatedLayer, GtuWithZeroLinearPathIsZero) {
  Rng rng(4);
  auto layer = GatedConvLayerT<double>::init(GateKind::GTU, 2, 3, 3, rng, false, "l");
  for (auto& x : layer.w.v.data) x = 0.0;
  for (auto& x : layer.b.v.data) x = 0.0;
  const TensorD X = uniform_tensor<double>(rng, {5, 3}, -1, 1);
  GraphD g;
  ParamBinder<double> binder(g);
  for (double v : g.value(layer.forward(g, binder, g.leaf(X))).data) EXPECT_EQ(v, 0.0);
}

TEST(GatedLayer, BilinearMatchesProductOfConvOracles) {
  Rng rng(5);
  auto layer = GatedConvLayerT<double>::init(GateKind::Bilinear, 2, 2, 3, rng, false, "l");
  const TensorD X = uniform_tensor<double>(rng, {5, 2}, -1, 1);
  GraphD g;
  ParamBinder<double> binder(g);
  const TensorD out = g.value(layer.forward(g, binder, g.leaf(X)));
  const TensorD a = conv_oracle(X, layer.w.v, layer.b.v);
  const TensorD b = conv_oracle(X, layer.v.v, layer.c.v);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    EXPECT_NEAR(out.data[i], a.data[i] * b.data[i], 1e-12);
  }
}

TEST(ResidualBlock, ZeroInnerStackIsIdentity) {
  Rng rng(6);
  auto block = ResidualBlockT<double>::init({{3, 4}}, GateKind::GLU, 4, rng, false, "blk");
  for (auto& layer : block.layers) {
    for (auto& x : layer.w.v.data) x = 0.0;
    for (auto& x : layer.b.v.data) x = 0.0;
  }
  ASSERT_FALSE(block.projection);
  const TensorD X = uniform_tensor<double>(rng, {5, 4}, -1, 1);
  GraphD g;
  ParamBinder<double> binder(g);
  expect_tensor_near(g.value(block.forward(g, binder, g.leaf(X))), X, 0.0);
}

TEST(ResidualBlock, SingleLayerBlockIsLayerPlusInput) {
  Rng rng(7);
  auto block = ResidualBlockT<double>::init({{2, 4}}, GateKind::GTU, 4, rng, false, "blk");
  const TensorD X = uniform_tensor<double>(rng, {6, 4}, -1, 1);
  GraphD g;
  ParamBinder<double> binder(g);
  const TensorD got = g.value(block.forward(g, binder, g.leaf(X)));

  GraphD g2;
  ParamBinder<double> binder2(g2);
  const int x2 = g2.leaf(X);
  const TensorD want = g2.value(add(g2, block.layers[0].forward(g2, binder2, x2), x2));
  expect_tensor_near(got, want, 0.0);
}

TEST(ResidualBlock, BottleneckReceptiveFieldByPerturbation) {
  Rng rng(8);
  auto block = ResidualBlockT<double>::init({{1, 4}, {3, 4}, {1, 8}}, GateKind::GLU, 8, rng, false, "blk");
  const TensorD X = uniform_tensor<double>(rng, {6, 8}, -1, 1);
  GraphD g;
  ParamBinder<double> binder(g);
  const TensorD base = g.value(block.forward(g, binder, g.leaf(X)));

  TensorD probe = X;
  for (int c = 0; c < 8; ++c) probe.at(0, c) += 1.0;
  GraphD g2;
  ParamBinder<double> binder2(g2);
  const TensorD out = g2.value(block.forward(g2, binder2, g2.leaf(probe)));
  for (int i = 0; i < 6; ++i) {
    bool changed = false;
    for (int c = 0; c < 8; ++c) changed = changed || out.at(i, c) != base.at(i, c);
    EXPECT_EQ(changed, i < 3) << "row " << i;  // receptive field 3
  }
}

TEST(ModelForward, CausalityUnderTokenPerturbation) {
  Rng rng(9);
  ModelF model(load_arch("gcnnsweep-train"), 40, rng, true);
  Rng seq_rng(10);
  const std::vector<int> tokens = random_ids<float>(seq_rng, 12, 40);
  const TensorF base = model_states(model, tokens);
  for (int j = 3; j < 12; j += 4) {
    std::vector<int> perturbed = tokens;
    perturbed[j] = (tokens[j] + 1) % 40;
    const TensorF out = model_states(model, perturbed);
    for (int i = 0; i < j; ++i) {
      for (int c = 0; c < base.dim(1); ++c) {
        ASSERT_EQ(base.at(i, c), out.at(i, c)) << "i=" << i << " j=" << j;
      }
    }
  }
}

TEST(ModelForward, ZeroBlocksReturnsEmbeddings) {
  Rng rng(11);
  ModelF model(parse_arch("embed=8\ngate=glu\n"), 20, rng, true);
  const std::vector<int> tokens = {3, 7, 3};
  const TensorF H = model_states(model, tokens);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 8; ++c) {
      EXPECT_EQ(H.at(r, c), model.embedding.v.at(tokens[r], c));
    }
  }
}

TEST(ModelForward, PresetReceptiveFieldMatchesAnalytic) {
  Rng rng(12);
  ModelF model(load_arch("gcnn8-tiny"), 60, rng, true);
  ASSERT_EQ(model.receptive_field(), 25);
  Rng probe_rng(13);
  EXPECT_EQ(measured_receptive_field(model, 40, probe_rng), 25);

  ModelF bottleneck(load_arch("gcnn8b-tiny"), 60, rng, true);
  ASSERT_EQ(bottleneck.receptive_field(), 25);
  EXPECT_EQ(measured_receptive_field(bottleneck, 40, probe_rng), 25);
}

TEST(KaimingInit, VarianceMatchesTwoOverFanIn) {
  Rng rng(14);
  const TensorD draw = kaiming_tensor<double>(rng, {100000}, 2);  // variance 1.0
  double mean = 0;
  for (double x : draw.data) mean += x;
  mean /= static_cast<double>(draw.numel());
  double var = 0;
  for (double x : draw.data) var += (x - mean) * (x - mean);
  var /= static_cast<double>(draw.numel());
  EXPECT_NEAR(var, 1.0, 0.05);
  EXPECT_NEAR(mean, 0.0, 0.02);
}

TEST(KaimingInit, BiasesAreExactZeros) {
  Rng rng(15);
  ModelF model(load_arch("gcnnsweep-train"), 30, rng, true);
  for (auto& block : model.blocks) {
    for (auto& layer : block.layers) {
      for (float v : layer.b.v.data) EXPECT_EQ(v, 0.0f);
      if (gate_has_second_path(layer.kind)) {
        for (float v : layer.c.v.data) EXPECT_EQ(v, 0.0f);
      }
    }
  }
}

TEST(KaimingInit, SeededTwiceIsBitIdentical) {
  Rng a(77), b(77);
  const TensorD t1 = kaiming_tensor<double>(a, {13, 7}, 13);
  const TensorD t2 = kaiming_tensor<double>(b, {13, 7}, 13);
  EXPECT_EQ(t1.data, t2.data);
}

TEST(KaimingInit, RejectsBadFanIn) {
  Rng rng(1);
  EXPECT_THROW(kaiming_tensor<double>(rng, {2, 2}, 0), ContractError);
}

TEST(WeightNorm, MaterializedWeightInvariantUnderDirectionRescale) {
  Rng rng(16);
  auto p = ParameterT<double>::normed("w", uniform_tensor<double>(rng, {3, 4, 5}, -1, 1));
  const TensorD w0 = p.materialize();
  for (auto& x : p.v.data) x *= 3.0;
  const TensorD w1 = p.materialize();
  for (std::size_t i = 0; i < w0.data.size(); ++i) {
    const double rel = std::abs(w1.data[i] - w0.data[i]) / std::max(std::abs(w0.data[i]), 1e-9);
    EXPECT_LT(rel, 1e-6);
  }
}

TEST(WeightNorm, ForwardOutputsUnchangedUnderDirectionRescale) {
  Rng rng(17);
  ModelF model(load_arch("gcnnsweep-train"), 25, rng, true);
  Rng seq_rng(18);
  const std::vector<int> tokens = random_ids<float>(seq_rng, 9, 25);
  const TensorF base = model_states(model, tokens);
  for (auto& x : model.blocks[0].layers[0].w.v.data) x *= 3.0f;
  const TensorF out = model_states(model, tokens);
  for (std::size_t i = 0; i < base.data.size(); ++i) {
    EXPECT_NEAR(out.data[i], base.data[i], 2e-5 * (1.0 + std::abs(base.data[i])));
  }
}

// Stacked GTU gradients shrink against GLU on identical inputs: the GTU
// gradient carries tanh' and sigma' downscaling at every level while the GLU
// keeps an unscaled linear path.
TEST(VanishingGradient, GtuLeafGradientSmallerThanGluAtDepthTen) {
  auto median_leaf_grad = [](GateKind kind, std::uint64_t seed) {
    Rng rng(seed);
    const int width = 8, depth = 10, rows = 6;
    GraphD g;
    const int x0 = g.leaf(uniform_tensor<double>(rng, {rows, width}, -1, 1));
    int h = x0;
    ParamBinder<double> binder(g);
    std::vector<GatedConvLayerT<double>> layers;
    layers.reserve(depth);
    for (int l = 0; l < depth; ++l) {
      layers.push_back(GatedConvLayerT<double>::init(kind, 1, width, width, rng, false,
                                                     "l" + std::to_string(l)));
    }
    for (auto& layer : layers) h = layer.forward(g, binder, h);
    g.backward(sum(g, h));
    std::vector<double> mags;
    for (double v : g.grad(x0).data) mags.push_back(std::abs(v));
    std::sort(mags.begin(), mags.end());
    return mags[mags.size() / 2];
  };
  int gtu_smaller = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    if (median_leaf_grad(GateKind::GTU, seed) < median_leaf_grad(GateKind::GLU, seed)) ++gtu_smaller;
  }
  EXPECT_GE(gtu_smaller, 4);
}

// Width-1 GTU chain: |dout/dx| is bounded by the product of per-layer
// factors |w*tanh'*sigma| + |v*sigma'*tanh|.
TEST(VanishingGradient, ScalarChainRespectsPerLayerFactorBound) {
  Rng rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const int depth = 10;
    std::vector<double> w(depth), b(depth), v(depth), c(depth);
    for (int l = 0; l < depth; ++l) {
      w[l] = std::uniform_real_distribution<double>(-2, 2)(rng);
      b[l] = std::uniform_real_distribution<double>(-1, 1)(rng);
      v[l] = std::uniform_real_distribution<double>(-2, 2)(rng);
      c[l] = std::uniform_real_distribution<double>(-1, 1)(rng);
    }
    const double x0 = std::uniform_real_distribution<double>(-1, 1)(rng);

    GraphD g;
    const int x = g.leaf(TensorD({1}, {x0}));
    int h = x;
    double bound = 1.0;
    double cur = x0;
    for (int l = 0; l < depth; ++l) {
      const int a = add(g, scale(g, h, w[l]), g.leaf(TensorD({1}, {b[l]})));
      const int gate = add(g, scale(g, h, v[l]), g.leaf(TensorD({1}, {c[l]})));
      h = mul(g, tanh(g, a), sigmoid(g, gate));
      const double av = w[l] * cur + b[l];
      const double gv = v[l] * cur + c[l];
      const double t = std::tanh(av);
      const double s = 1.0 / (1.0 + std::exp(-gv));
      bound *= std::abs(w[l] * (1 - t * t) * s) + std::abs(v[l] * s * (1 - s) * t);
      cur = t * s;
    }
    g.backward(sum(g, h));
    EXPECT_LE(std::abs(g.grad(x).data[0]), bound + 1e-12);
  }
}

TEST(ModelForward, ValidityMaskZeroesPrefixExactly) {
  // A row with an invalid prefix must equal the forward of the suffix alone.
  Rng rng(20);
  ModelF model(load_arch("gcnnsweep-train"), 30, rng, true);
  Rng seq_rng(21);
  const std::vector<int> suffix = random_ids<float>(seq_rng, 6, 30);
  const TensorF want = model_states(model, suffix);

  std::vector<int> padded(4, 0);
  padded.insert(padded.end(), suffix.begin(), suffix.end());
  std::vector<float> valid(10, 1.0f);
  for (int i = 0; i < 4; ++i) valid[i] = 0.0f;
  GraphF g;
  g.grad_enabled = false;
  ParamBinder<float> binder(g);
  const TensorF got = g.value(model.forward_states(g, binder, padded, &valid));
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < got.dim(1); ++c) {
      ASSERT_EQ(got.at(r + 4, c), want.at(r, c)) << "row " << r;
    }
  }
}

}  // namespace
}  // namespace glunet
