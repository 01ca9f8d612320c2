#include "glunet/gradsuite.hpp"

#include <algorithm>
#include <cmath>

#include "glunet/gradcheck.hpp"
#include "glunet/model.hpp"

namespace glunet {

namespace {

TensorD rand_tensor(Rng& rng, std::vector<int> shape, double lo = -1.5, double hi = 1.5) {
  return uniform_tensor<double>(rng, std::move(shape), lo, hi);
}

std::vector<int> rand_ids(Rng& rng, int count, int bound) {
  std::vector<int> ids(count);
  for (auto& x : ids) x = static_cast<int>(rng() % static_cast<std::uint64_t>(bound));
  return ids;
}

double rel_err(double ad, double fd) {
  const double denom = std::max({std::abs(ad), std::abs(fd), 1e-3});
  return std::abs(ad - fd) / denom;
}

}  // namespace

double fd_check_parameters(const std::function<double()>& loss_value,
                           const std::vector<ParameterT<double>*>& params, double eps) {
  double worst = 0;
  for (auto* p : params) {
    std::vector<std::pair<TensorD*, TensorD*>> slots = {{&p->v, &p->grad_v}};
    if (p->weight_normed) slots.push_back({&p->g, &p->grad_g});
    for (auto [value, grad] : slots) {
      for (std::size_t i = 0; i < value->data.size(); ++i) {
        const double saved = value->data[i];
        value->data[i] = saved + eps;
        const double fp = loss_value();
        value->data[i] = saved - eps;
        const double fm = loss_value();
        value->data[i] = saved;
        worst = std::max(worst, rel_err(grad->data[i], (fp - fm) / (2 * eps)));
      }
    }
  }
  return worst;
}

namespace {

// ---- leaf-input checks through finite_diff_max_rel_err --------------------

double check_matmul(Rng& rng) {
  double worst = 0;
  for (int inst = 0; inst < 10; ++inst) {
    const int p = 2 + static_cast<int>(rng() % 4);
    const int q = 2 + static_cast<int>(rng() % 4);
    const int r = 2 + static_cast<int>(rng() % 4);
    const TensorD A = rand_tensor(rng, {p, q});
    const TensorD B = rand_tensor(rng, {q, r});
    worst = std::max(worst, finite_diff_max_rel_err(
                                [&](GraphD& g, int x) { return sum(g, tanh(g, matmul(g, x, g.leaf(B)))); }, A));
    worst = std::max(worst, finite_diff_max_rel_err(
                                [&](GraphD& g, int x) { return sum(g, tanh(g, matmul(g, g.leaf(A), x))); }, B));
  }
  return worst;
}

double check_conv(Rng& rng) {
  double worst = 0;
  for (int inst = 0; inst < 10; ++inst) {
    const int N = 3 + static_cast<int>(rng() % 5);
    const int m = 2 + static_cast<int>(rng() % 3);
    const int n = 2 + static_cast<int>(rng() % 3);
    const int k = 1 + static_cast<int>(rng() % 4);
    const TensorD X = rand_tensor(rng, {N, m});
    const TensorD W = rand_tensor(rng, {k, m, n});
    const TensorD B = rand_tensor(rng, {n});
    auto loss = [](GraphD& g, int x, int w, int b) {
      return sum(g, tanh(g, conv1d_causal(g, x, w, b)));
    };
    worst = std::max(worst, finite_diff_max_rel_err(
                                [&](GraphD& g, int x) { return loss(g, x, g.leaf(W), g.leaf(B)); }, X));
    worst = std::max(worst, finite_diff_max_rel_err(
                                [&](GraphD& g, int w) { return loss(g, g.leaf(X), w, g.leaf(B)); }, W));
    worst = std::max(worst, finite_diff_max_rel_err(
                                [&](GraphD& g, int b) { return loss(g, g.leaf(X), g.leaf(W), b); }, B));
  }
  return worst;
}

double check_unary(Rng& rng, EwKind kind, double lo, double hi) {
  double worst = 0;
  for (int inst = 0; inst < 10; ++inst) {
    TensorD X = rand_tensor(rng, {3, 4}, lo, hi);
    if (kind == EwKind::Relu) {
      for (auto& x : X.data) {
        if (std::abs(x) < 0.1) x = x < 0 ? x - 0.1 : x + 0.1;  // stay off the kink
      }
    }
    worst = std::max(worst, finite_diff_max_rel_err(
                                [&](GraphD& g, int x) { return sum(g, elementwise(g, kind, x)); }, X));
  }
  return worst;
}

double check_binary(Rng& rng, EwKind kind) {
  double worst = 0;
  for (int inst = 0; inst < 10; ++inst) {
    const TensorD A = rand_tensor(rng, {3, 4});
    const TensorD B = rand_tensor(rng, {3, 4});
    worst = std::max(worst,
                     finite_diff_max_rel_err(
                         [&](GraphD& g, int x) { return sum(g, tanh(g, elementwise(g, kind, x, g.leaf(B)))); }, A));
    worst = std::max(worst,
                     finite_diff_max_rel_err(
                         [&](GraphD& g, int x) { return sum(g, tanh(g, elementwise(g, kind, g.leaf(A), x))); }, B));
  }
  return worst;
}

double check_bias_add(Rng& rng) {
  double worst = 0;
  for (int inst = 0; inst < 10; ++inst) {
    const TensorD X = rand_tensor(rng, {4, 3});
    const TensorD B = rand_tensor(rng, {3});
    worst = std::max(worst, finite_diff_max_rel_err(
                                [&](GraphD& g, int x) { return sum(g, tanh(g, bias_add(g, x, g.leaf(B)))); }, X));
    worst = std::max(worst, finite_diff_max_rel_err(
                                [&](GraphD& g, int b) { return sum(g, tanh(g, bias_add(g, g.leaf(X), b))); }, B));
  }
  return worst;
}

double check_scale_ops(Rng& rng) {
  double worst = 0;
  for (int inst = 0; inst < 10; ++inst) {
    const TensorD X = rand_tensor(rng, {4, 3});
    std::vector<double> factors = {1.0, 0.0, -0.5, 2.0};
    worst = std::max(worst, finite_diff_max_rel_err(
                                [&](GraphD& g, int x) {
                                  return sum(g, tanh(g, row_scale(g, scale(g, x, 0.7), factors)));
                                },
                                X));
  }
  return worst;
}

double check_take_scatter(Rng& rng) {
  double worst = 0;
  for (int inst = 0; inst < 10; ++inst) {
    const TensorD X = rand_tensor(rng, {5, 3});
    const std::vector<int> rows = {4, 0, 2};
    worst = std::max(worst, finite_diff_max_rel_err(
                                [&](GraphD& g, int x) { return sum(g, tanh(g, take_rows(g, x, rows))); }, X));
    const TensorD S = rand_tensor(rng, {3});
    worst = std::max(worst, finite_diff_max_rel_err(
                                [&](GraphD& g, int s) {
                                  return sum(g, tanh(g, scatter_rows(g, s, rows, 6)));
                                },
                                S));
  }
  return worst;
}

double check_vconcat(Rng& rng) {
  double worst = 0;
  for (int inst = 0; inst < 10; ++inst) {
    const TensorD A = rand_tensor(rng, {2, 3});
    const TensorD B = rand_tensor(rng, {4, 3});
    worst = std::max(worst, finite_diff_max_rel_err(
                                [&](GraphD& g, int a) {
                                  return sum(g, tanh(g, vconcat(g, {a, g.leaf(B)})));
                                },
                                A));
    worst = std::max(worst, finite_diff_max_rel_err(
                                [&](GraphD& g, int b) {
                                  return sum(g, tanh(g, vconcat(g, {g.leaf(A), b})));
                                },
                                B));
  }
  return worst;
}

double check_embed(Rng& rng) {
  double worst = 0;
  for (int inst = 0; inst < 10; ++inst) {
    const TensorD table = rand_tensor(rng, {6, 4});
    const std::vector<int> ids = rand_ids(rng, 5, 6);
    worst = std::max(worst, finite_diff_max_rel_err(
                                [&](GraphD& g, int t) {
                                  return sum(g, tanh(g, embedding_lookup(g, t, ids)));
                                },
                                table));
  }
  return worst;
}

double check_row_log_prob(Rng& rng) {
  double worst = 0;
  for (int inst = 0; inst < 10; ++inst) {
    const TensorD logits = rand_tensor(rng, {4, 7}, -3, 3);
    const std::vector<int> targets = rand_ids(rng, 4, 7);
    worst = std::max(worst, finite_diff_max_rel_err(
                                [&](GraphD& g, int l) { return sum(g, row_log_prob(g, l, targets)); }, logits));
  }
  return worst;
}

// ---- composite checks through the parameter FD driver ---------------------

double check_layer(Rng& rng, GateKind kind) {
  double worst = 0;
  for (int inst = 0; inst < 10; ++inst) {
    auto layer = GatedConvLayerT<double>::init(kind, 3, 3, 4, rng, /*weight_norm=*/false, "l");
    const TensorD X = rand_tensor(rng, {4, 3});
    auto loss = [&]() {
      GraphD g;
      ParamBinder<double> binder(g);
      return g.value(sum(g, layer.forward(g, binder, g.leaf(X)))).data[0];
    };
    std::vector<ParameterT<double>*> params;
    layer.collect(params);
    for (auto* p : params) p->zero_grad();
    {
      GraphD g;
      ParamBinder<double> binder(g);
      g.backward(sum(g, layer.forward(g, binder, g.leaf(X))));
      binder.pull_grads();
    }
    worst = std::max(worst, fd_check_parameters(loss, params));
    // the input too
    worst = std::max(worst, finite_diff_max_rel_err(
                                [&](GraphD& g, int x) {
                                  ParamBinder<double> binder(g);
                                  return sum(g, layer.forward(g, binder, x));
                                },
                                X));
  }
  return worst;
}

double check_residual_block(Rng& rng) {
  double worst = 0;
  for (int inst = 0; inst < 10; ++inst) {
    // width change forces the learned skip projection
    auto block = ResidualBlockT<double>::init({{1, 3}, {3, 3}, {1, 5}}, GateKind::GLU, 4, rng, false, "blk");
    const TensorD X = rand_tensor(rng, {5, 4});
    std::vector<ParameterT<double>*> params;
    block.collect(params);
    for (auto* p : params) p->zero_grad();
    {
      GraphD g;
      ParamBinder<double> binder(g);
      g.backward(sum(g, tanh(g, block.forward(g, binder, g.leaf(X)))));
      binder.pull_grads();
    }
    auto loss = [&]() {
      GraphD g;
      ParamBinder<double> binder(g);
      return g.value(sum(g, tanh(g, block.forward(g, binder, g.leaf(X))))).data[0];
    };
    worst = std::max(worst, fd_check_parameters(loss, params));
  }
  return worst;
}

double check_full_head(Rng& rng) {
  double worst = 0;
  for (int inst = 0; inst < 10; ++inst) {
    auto head = FullSoftmaxHeadT<double>::init(4, 9, rng, false);
    const TensorD H = rand_tensor(rng, {5, 4});
    const std::vector<int> targets = rand_ids(rng, 5, 9);
    std::vector<ParameterT<double>*> params;
    head.collect(params);
    for (auto* p : params) p->zero_grad();
    {
      GraphD g;
      ParamBinder<double> binder(g);
      g.backward(sum(g, head.logprob(g, binder, g.leaf(H), targets)));
      binder.pull_grads();
    }
    auto loss = [&]() {
      GraphD g;
      ParamBinder<double> binder(g);
      return g.value(sum(g, head.logprob(g, binder, g.leaf(H), targets))).data[0];
    };
    worst = std::max(worst, fd_check_parameters(loss, params));
    worst = std::max(worst, finite_diff_max_rel_err(
                                [&](GraphD& g, int h) {
                                  ParamBinder<double> binder(g);
                                  return sum(g, head.logprob(g, binder, h, targets));
                                },
                                H));
  }
  return worst;
}

double check_adaptive_head(Rng& rng) {
  double worst = 0;
  for (int inst = 0; inst < 10; ++inst) {
    auto head = AdaptiveSoftmaxHeadT<double>::init(8, AdaptiveCutoffs{{3, 6, 10}}, 2, rng, false);
    const TensorD H = rand_tensor(rng, {6, 8});
    // spread targets over the shortlist and both tails
    const std::vector<int> targets = {0, 4, 9, 2, 7, static_cast<int>(rng() % 10)};
    std::vector<ParameterT<double>*> params;
    head.collect(params);
    for (auto* p : params) p->zero_grad();
    {
      GraphD g;
      ParamBinder<double> binder(g);
      g.backward(sum(g, head.logprob(g, binder, g.leaf(H), targets)));
      binder.pull_grads();
    }
    auto loss = [&]() {
      GraphD g;
      ParamBinder<double> binder(g);
      return g.value(sum(g, head.logprob(g, binder, g.leaf(H), targets))).data[0];
    };
    worst = std::max(worst, fd_check_parameters(loss, params));
    worst = std::max(worst, finite_diff_max_rel_err(
                                [&](GraphD& g, int h) {
                                  ParamBinder<double> binder(g);
                                  return sum(g, head.logprob(g, binder, h, targets));
                                },
                                H));
  }
  return worst;
}

double check_weight_norm_chain(Rng& rng) {
  double worst = 0;
  for (int inst = 0; inst < 10; ++inst) {
    auto p = ParameterT<double>::normed("wn", rand_tensor(rng, {3, 4}, 0.3, 1.5));
    const TensorD X = rand_tensor(rng, {5, 3});
    auto loss = [&]() {
      GraphD g;
      ParamBinder<double> binder(g);
      return g.value(sum(g, tanh(g, matmul(g, g.leaf(X), binder.bind(p))))).data[0];
    };
    p.zero_grad();
    {
      GraphD g;
      ParamBinder<double> binder(g);
      g.backward(sum(g, tanh(g, matmul(g, g.leaf(X), binder.bind(p)))));
      binder.pull_grads();
    }
    worst = std::max(worst, fd_check_parameters(loss, {&p}));
  }
  return worst;
}

double check_model_end_to_end(Rng& rng) {
  ArchSpec spec = parse_arch(
      "embed=6\n"
      "conv=[2,6]x1\n"
      "conv=B[1,3;2,3;1,8]x1\n"
      "gate=glu\n"
      "cutoffs=4,9\n");
  double worst = 0;
  for (int inst = 0; inst < 10; ++inst) {
    ModelT<double> model(spec, 12, rng, /*weight_norm=*/true);
    const std::vector<int> tokens = rand_ids(rng, 6, 12);
    const std::vector<int> targets = rand_ids(rng, 6, 12);
    auto loss = [&]() {
      GraphD g;
      ParamBinder<double> binder(g);
      return g.value(sum(g, model.score(g, binder, tokens, targets))).data[0];
    };
    auto params = model.parameters();
    for (auto* p : params) p->zero_grad();
    {
      GraphD g;
      ParamBinder<double> binder(g);
      g.backward(sum(g, model.score(g, binder, tokens, targets)));
      binder.pull_grads();
    }
    worst = std::max(worst, fd_check_parameters(loss, params));
  }
  return worst;
}

}  // namespace

std::vector<GradCheckEntry> run_gradcheck_suites(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<GradCheckEntry> out;
  auto push = [&](std::string name, double err) { out.push_back({std::move(name), err}); };
  push("matmul", check_matmul(rng));
  push("conv1d_causal", check_conv(rng));
  push("bias_add", check_bias_add(rng));
  push("sigmoid", check_unary(rng, EwKind::Sigmoid, -3, 3));
  push("tanh", check_unary(rng, EwKind::Tanh, -2, 2));
  push("relu", check_unary(rng, EwKind::Relu, -2, 2));
  push("exp", check_unary(rng, EwKind::Exp, -1.5, 1.5));
  push("log", check_unary(rng, EwKind::Log, 0.2, 3.0));
  push("add", check_binary(rng, EwKind::Add));
  push("sub", check_binary(rng, EwKind::Sub));
  push("mul", check_binary(rng, EwKind::Mul));
  push("scale+row_scale", check_scale_ops(rng));
  push("take_rows+scatter_rows", check_take_scatter(rng));
  push("vconcat", check_vconcat(rng));
  push("embed", check_embed(rng));
  push("row_log_prob", check_row_log_prob(rng));
  push("glu_layer", check_layer(rng, GateKind::GLU));
  push("gtu_layer", check_layer(rng, GateKind::GTU));
  push("bilinear_layer", check_layer(rng, GateKind::Bilinear));
  push("residual_block", check_residual_block(rng));
  push("full_softmax_head", check_full_head(rng));
  push("adaptive_softmax_head", check_adaptive_head(rng));
  push("weight_norm_chain", check_weight_norm_chain(rng));
  push("model_end_to_end", check_model_end_to_end(rng));
  return out;
}

}  // namespace glunet
