#include <benchmark/benchmark.h>

#include "glunet/batching.hpp"
#include "glunet/model.hpp"
#include "glunet/presets.hpp"
#include "glunet/train.hpp"

namespace {

using namespace glunet;

void BM_Matmul(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(1);
  const TensorF A = uniform_tensor<float>(rng, {n, n}, -1, 1);
  const TensorF B = uniform_tensor<float>(rng, {n, n}, -1, 1);
  for (auto _ : state) {
    GraphF g;
    g.grad_enabled = false;
    benchmark::DoNotOptimize(matmul(g, g.leaf(A), g.leaf(B)));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n) * n * n);
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(128)->Arg(256);

void BM_CausalConvForward(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  Rng rng(1);
  const TensorF X = uniform_tensor<float>(rng, {64, width}, -1, 1);
  const TensorF W = uniform_tensor<float>(rng, {4, width, width}, -1, 1);
  const TensorF B = uniform_tensor<float>(rng, {width}, -1, 1);
  for (auto _ : state) {
    GraphF g;
    g.grad_enabled = false;
    benchmark::DoNotOptimize(conv1d_causal(g, g.leaf(X), g.leaf(W), g.leaf(B)));
  }
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_CausalConvForward)->Arg(32)->Arg(64)->Arg(128);

ModelF make_model(const char* preset) {
  Rng rng(1);
  return ModelF(load_arch(preset), 500, rng, true);
}

void BM_ForwardScore(benchmark::State& state) {
  ModelF model = make_model("gcnn8-tiny");
  Batch b;
  b.rows = 8;
  b.cols = 24;
  Rng rng(2);
  b.inputs.resize(static_cast<std::size_t>(b.rows) * b.cols);
  b.targets.resize(b.inputs.size());
  for (auto& x : b.inputs) x = static_cast<int>(rng() % 500);
  for (auto& x : b.targets) x = static_cast<int>(rng() % 500);
  b.mask.assign(b.inputs.size(), 1.0f);
  b.input_valid.assign(b.inputs.size(), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(score_batch(model, b));
  }
  state.SetItemsProcessed(state.iterations() * b.rows * b.cols);
}
BENCHMARK(BM_ForwardScore);

void BM_TrainStep(benchmark::State& state) {
  Rng rng(1);
  ModelF model(load_arch("gcnnsweep-train"), 300, rng, true);
  std::vector<std::vector<int>> seqs;
  for (int s = 0; s < 64; ++s) {
    std::vector<int> seq = {Vocabulary::kBos};
    for (int t = 0; t < 20; ++t) seq.push_back(3 + static_cast<int>(rng() % 297));
    seq.push_back(Vocabulary::kEos);
    seqs.push_back(std::move(seq));
  }
  TrainOptions opts;
  opts.budget = TrainBudget::steps(1);
  opts.eval_every = -1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_model(model, seqs, nullptr, opts));
  }
}
BENCHMARK(BM_TrainStep);

}  // namespace

BENCHMARK_MAIN();
