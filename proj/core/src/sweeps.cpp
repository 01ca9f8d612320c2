#include "glunet/sweeps.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

namespace glunet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ArchSpec base_arch(const SweepOptions& opts, GateKind gate) {
  ArchSpec spec;
  spec.embed_dim = opts.embed;
  BlockSpec block;
  block.taps = {{opts.kernel, opts.width}};
  block.repeat = opts.depth;
  spec.blocks = {block};
  spec.gate = gate;
  return spec;
}

ArchSpec scale_widths(ArchSpec arch, double factor) {
  for (auto& b : arch.blocks) {
    for (auto& t : b.taps) t.n = std::max(4, static_cast<int>(std::lround(t.n * factor)));
  }
  return arch;
}

struct ArmTask {
  SweepArm arm;
  TrainBudget budget;
};

SweepArm run_arm(ArmTask task, const std::vector<std::vector<int>>& train_seqs,
                 const std::vector<std::vector<int>>& valid_seqs, int vocab_size,
                 const SweepOptions& opts) {
  SweepArm arm = std::move(task.arm);
  Rng rng(arm.seed);
  ModelF model(arm.arch, vocab_size, rng, arm.weight_norm);
  arm.params = count_params(arm.arch, vocab_size);

  TrainOptions topt;
  topt.optim = opts.optim;
  topt.optim.learning_rate = arm.learning_rate;
  topt.clip = arm.clip;
  topt.batch_size = opts.batch_size;
  topt.unroll = opts.unroll;
  topt.mode = opts.mode;
  topt.seed = arm.seed;
  topt.budget = task.budget;
  topt.eval_every = opts.eval_every;
  topt.abort_on_divergence = false;

  TrainResult res = train_model(model, train_seqs, &valid_seqs, topt);
  arm.log = std::move(res.log);
  arm.diverged = res.diverged;
  if (res.diverged) {
    arm.final_ppl = kInf;
    arm.final_nll = kInf;
  } else {
    arm.final_ppl = res.final_val_ppl;
    arm.final_nll = final_smoothed_nll(arm.log);
  }
  return arm;
}

SweepReport run_arms(std::vector<ArmTask> tasks, const std::vector<std::vector<int>>& train_seqs,
                     const std::vector<std::vector<int>>& valid_seqs, int vocab_size,
                     const SweepOptions& opts) {
  SweepReport report;
  report.arms.resize(tasks.size());
  const int jobs = std::max(1, opts.jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      report.arms[i] = run_arm(std::move(tasks[i]), train_seqs, valid_seqs, vocab_size, opts);
    }
    return report;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= tasks.size()) return;
        report.arms[i] = run_arm(std::move(tasks[i]), train_seqs, valid_seqs, vocab_size, opts);
      }
    });
  }
  for (auto& w : workers) w.join();
  return report;
}

double median(std::vector<double> xs) {
  if (xs.empty()) return kInf;
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

std::vector<std::string> SweepReport::labels() const {
  std::vector<std::string> out;
  for (const auto& a : arms) {
    if (std::find(out.begin(), out.end(), a.label) == out.end()) out.push_back(a.label);
  }
  return out;
}

double SweepReport::median_ppl(const std::string& label) const {
  std::vector<double> xs;
  for (const auto& a : arms) {
    if (a.label == label) xs.push_back(a.final_ppl);
  }
  return median(std::move(xs));
}

std::string SweepReport::to_csv() const {
  std::ostringstream os;
  os << "label,seed,params,lr,clip,weight_norm,final_ppl,final_nll,diverged\n";
  os.precision(10);
  for (const auto& a : arms) {
    os << a.label << ',' << a.seed << ',' << a.params << ',' << a.learning_rate << ',' << (a.clip ? 1 : 0)
       << ',' << (a.weight_norm ? 1 : 0) << ',' << a.final_ppl << ',' << a.final_nll << ','
       << (a.diverged ? 1 : 0) << '\n';
  }
  return os.str();
}

ArchSpec fit_width_to_params(ArchSpec arch, int vocab_size, std::int64_t target_params) {
  ArchSpec best = arch;
  std::int64_t best_diff = std::numeric_limits<std::int64_t>::max();
  const int base_width = arch.blocks.at(0).taps.at(0).n;
  for (int w = 4; w <= 4 * base_width + 64; ++w) {
    ArchSpec candidate = scale_widths(arch, static_cast<double>(w) / base_width);
    const std::int64_t diff = std::llabs(count_params(candidate, vocab_size) - target_params);
    if (diff < best_diff) {
      best_diff = diff;
      best = candidate;
    }
  }
  return best;
}

SweepReport gating_sweep(const std::vector<std::vector<int>>& train_seqs,
                         const std::vector<std::vector<int>>& valid_seqs, int vocab_size,
                         const std::vector<GateKind>& gates, const SweepOptions& opts) {
  if (gates.empty()) throw ContractError("gating sweep: no gate kinds");
  const std::int64_t target = count_params(base_arch(opts, GateKind::GLU), vocab_size);
  std::vector<ArmTask> tasks;
  for (GateKind gate : gates) {
    ArchSpec arch = fit_width_to_params(base_arch(opts, gate), vocab_size, target);
    for (int s = 0; s < opts.seeds; ++s) {
      ArmTask t;
      t.arm.label = to_string(gate);
      t.arm.seed = opts.first_seed + static_cast<std::uint64_t>(s);
      t.arm.arch = arch;
      t.arm.learning_rate = opts.optim.learning_rate;
      t.budget = TrainBudget::steps(opts.steps);
      tasks.push_back(std::move(t));
    }
  }
  return run_arms(std::move(tasks), train_seqs, valid_seqs, vocab_size, opts);
}

SweepReport nonlinearity_sweep(const std::vector<std::vector<int>>& train_seqs,
                               const std::vector<std::vector<int>>& valid_seqs, int vocab_size,
                               const SweepOptions& opts) {
  return gating_sweep(train_seqs, valid_seqs, vocab_size,
                      {GateKind::GLU, GateKind::Bilinear, GateKind::Linear}, opts);
}

ArchSpec arch_for_window(int window, int embed, int width, GateKind gate) {
  if (window < 1) throw ContractError("context sweep: window must be >= 1");
  ArchSpec spec;
  spec.embed_dim = embed;
  spec.gate = gate;
  spec.context_window = window;
  int remaining = window - 1;
  // First layer absorbs the remainder so every receptive field is exact.
  while (remaining > 0) {
    const int step = (remaining % 3 != 0) ? remaining % 3 : 3;
    BlockSpec block;
    block.taps = {{step + 1, width}};
    block.repeat = (remaining - step) / 3 + 1;
    if (step != 3) block.repeat = 1;
    spec.blocks.push_back(block);
    remaining -= step * block.repeat;
  }
  spec.validate();
  if (spec.receptive_field() != window) throw ContractError("context sweep: receptive field mismatch");
  return spec;
}

SweepReport context_sweep(const std::vector<std::vector<int>>& train_seqs,
                          const std::vector<std::vector<int>>& valid_seqs, int vocab_size,
                          const std::vector<int>& windows, const SweepOptions& opts) {
  if (windows.empty()) throw ContractError("context sweep: no windows");
  const int max_window = *std::max_element(windows.begin(), windows.end());
  const std::int64_t target =
      count_params(arch_for_window(max_window, opts.embed, opts.width, GateKind::GLU), vocab_size);
  std::vector<ArmTask> tasks;
  for (int window : windows) {
    ArchSpec arch = fit_width_to_params(arch_for_window(window, opts.embed, opts.width, GateKind::GLU),
                                        vocab_size, target);
    arch.context_window = window;
    for (int s = 0; s < opts.seeds; ++s) {
      ArmTask t;
      t.arm.label = "window=" + std::to_string(window);
      t.arm.seed = opts.first_seed + static_cast<std::uint64_t>(s);
      t.arm.arch = arch;
      t.arm.learning_rate = opts.optim.learning_rate;
      t.budget = TrainBudget::steps(opts.steps);
      tasks.push_back(std::move(t));
    }
  }
  return run_arms(std::move(tasks), train_seqs, valid_seqs, vocab_size, opts);
}

SweepReport training_ablation(const std::vector<std::vector<int>>& train_seqs,
                              const std::vector<std::vector<int>>& valid_seqs, int vocab_size,
                              const SweepOptions& opts) {
  const ArchSpec arch = base_arch(opts, GateKind::GLU);
  const double lr_grid[] = {0.01, 0.1, 1.0};
  std::vector<ArmTask> tasks;
  for (const bool clip : {true, false}) {
    for (const bool wn : {true, false}) {
      std::string label = std::string(clip ? "clip" : "noclip") + "+" + (wn ? "wn" : "nown");
      for (double lr : lr_grid) {
        for (int s = 0; s < opts.seeds; ++s) {
          ArmTask t;
          t.arm.label = label;
          t.arm.seed = opts.first_seed + static_cast<std::uint64_t>(s);
          t.arm.arch = arch;
          t.arm.clip = clip;
          t.arm.weight_norm = wn;
          t.arm.learning_rate = lr;
          t.budget = TrainBudget::epochs(1);
          tasks.push_back(std::move(t));
        }
      }
    }
  }
  return run_arms(std::move(tasks), train_seqs, valid_seqs, vocab_size, opts);
}

LinearAffineMap collapse_linear_model(ModelF& model) {
  if (model.arch.gate != GateKind::Linear) {
    throw ContractError("collapse: model must use the linear gate kind");
  }
  // Start from the identity map on the embeddings.
  const int e = model.arch.embed_dim;
  LinearAffineMap map;
  map.delay_mats = {TensorF({e, e})};
  for (int i = 0; i < e; ++i) map.delay_mats[0].at(i, i) = 1.0f;
  map.bias = TensorF({e});

  auto compose_layer = [&](const std::vector<TensorF>& layer_delays, const TensorF& layer_bias) {
    const int out_ch = layer_bias.dim(0);
    std::vector<TensorF> next(map.delay_mats.size() + layer_delays.size() - 1);
    for (auto& m : next) m = TensorF({e, out_ch});
    for (std::size_t d1 = 0; d1 < map.delay_mats.size(); ++d1) {
      const TensorF& A = map.delay_mats[d1];
      for (std::size_t d2 = 0; d2 < layer_delays.size(); ++d2) {
        const TensorF& B = layer_delays[d2];
        TensorF& C = next[d1 + d2];
        const int p = A.dim(1);
        for (int i = 0; i < e; ++i) {
          for (int k = 0; k < p; ++k) {
            const float a = A.at(i, k);
            if (a == 0.0f) continue;
            for (int j = 0; j < out_ch; ++j) C.at(i, j) += a * B.at(k, j);
          }
        }
      }
    }
    TensorF next_bias({out_ch});
    for (std::size_t d2 = 0; d2 < layer_delays.size(); ++d2) {
      const TensorF& B = layer_delays[d2];
      for (int k = 0; k < B.dim(0); ++k) {
        const float bv = map.bias.at(k);
        if (bv == 0.0f) continue;
        for (int j = 0; j < out_ch; ++j) next_bias.at(j) += bv * B.at(k, j);
      }
    }
    for (int j = 0; j < out_ch; ++j) next_bias.at(j) += layer_bias.at(j);
    map.delay_mats = std::move(next);
    map.bias = std::move(next_bias);
  };

  for (auto& block : model.blocks) {
    // The block is affine in its input x: inner(x) + skip(x). Express both in
    // delay space over x, add them, then compose with the running map.
    std::vector<TensorF> block_delays = {TensorF({block.in_ch, block.out_ch})};
    TensorF block_bias({block.out_ch});
    {
      // inner stack, one linear conv at a time
      std::vector<TensorF> inner = {TensorF({block.in_ch, block.in_ch})};
      for (int i = 0; i < block.in_ch; ++i) inner[0].at(i, i) = 1.0f;
      TensorF inner_bias({block.in_ch});
      for (auto& layer : block.layers) {
        const TensorF w = layer.w.materialize();  // [k x in x out]
        const int k = w.dim(0), in_ch = w.dim(1), out_ch = w.dim(2);
        std::vector<TensorF> taps(k);
        for (int j = 0; j < k; ++j) {
          taps[j] = TensorF({in_ch, out_ch});
          // delay d corresponds to tap j = k-1-d
          for (int c = 0; c < in_ch; ++c) {
            for (int o = 0; o < out_ch; ++o) taps[j].at(c, o) = w.at(k - 1 - j, c, o);
          }
        }
        // compose inner with this layer
        std::vector<TensorF> next(inner.size() + taps.size() - 1);
        for (auto& m : next) m = TensorF({block.in_ch, out_ch});
        for (std::size_t d1 = 0; d1 < inner.size(); ++d1) {
          for (std::size_t d2 = 0; d2 < taps.size(); ++d2) {
            TensorF& C = next[d1 + d2];
            const TensorF& A = inner[d1];
            const TensorF& B = taps[d2];
            for (int i = 0; i < block.in_ch; ++i) {
              for (int c = 0; c < A.dim(1); ++c) {
                const float a = A.at(i, c);
                if (a == 0.0f) continue;
                for (int o = 0; o < out_ch; ++o) C.at(i, o) += a * B.at(c, o);
              }
            }
          }
        }
        TensorF nb({out_ch});
        for (std::size_t d2 = 0; d2 < taps.size(); ++d2) {
          for (int c = 0; c < taps[d2].dim(0); ++c) {
            const float bv = inner_bias.at(c);
            if (bv == 0.0f) continue;
            for (int o = 0; o < out_ch; ++o) nb.at(o) += bv * taps[d2].at(c, o);
          }
        }
        const TensorF lb = layer.b.materialize();
        for (int o = 0; o < out_ch; ++o) nb.at(o) += lb.at(o);
        inner = std::move(next);
        inner_bias = std::move(nb);
      }
      // skip path at delay 0
      block_delays.assign(inner.size(), TensorF({block.in_ch, block.out_ch}));
      for (std::size_t d = 0; d < inner.size(); ++d) {
        for (std::size_t i = 0; i < inner[d].data.size(); ++i) block_delays[d].data[i] = inner[d].data[i];
      }
      if (block.projection) {
        const TensorF P = block.projection->materialize();
        for (int i = 0; i < block.in_ch; ++i) {
          for (int o = 0; o < block.out_ch; ++o) block_delays[0].at(i, o) += P.at(i, o);
        }
      } else {
        for (int i = 0; i < block.in_ch; ++i) block_delays[0].at(i, i) += 1.0f;
      }
      block_bias = std::move(inner_bias);
    }
    compose_layer(block_delays, block_bias);
  }
  return map;
}

TensorF apply_affine(const LinearAffineMap& map, const TensorF& embedded) {
  const int N = embedded.dim(0);
  const int out_ch = map.bias.dim(0);
  TensorF out({N, out_ch});
  for (int i = 0; i < N; ++i) {
    for (int o = 0; o < out_ch; ++o) out.at(i, o) = map.bias.at(o);
    for (std::size_t d = 0; d < map.delay_mats.size(); ++d) {
      const int src = i - static_cast<int>(d);
      if (src < 0) continue;
      const TensorF& M = map.delay_mats[d];
      for (int c = 0; c < M.dim(0); ++c) {
        const float x = embedded.at(src, c);
        if (x == 0.0f) continue;
        for (int o = 0; o < out_ch; ++o) out.at(i, o) += x * M.at(c, o);
      }
    }
  }
  return out;
}

long tokens_to_reach_nll(const RunLog& log, double target_nll, int smooth_window) {
  if (log.records.empty()) return -1;
  const std::size_t full = std::min<std::size_t>(smooth_window, log.records.size());
  std::vector<double> window;
  for (const auto& r : log.records) {
    window.push_back(r.train_nll);
    if (window.size() > full) window.erase(window.begin());
    if (window.size() < full) continue;
    double mean = 0;
    for (double x : window) mean += x;
    mean /= static_cast<double>(window.size());
    if (mean <= target_nll) return r.tokens;
  }
  return -1;
}

double final_smoothed_nll(const RunLog& log, double tail_fraction) {
  if (log.records.empty()) return kInf;
  const std::size_t n = log.records.size();
  const std::size_t tail = std::max<std::size_t>(1, static_cast<std::size_t>(n * tail_fraction));
  double mean = 0;
  for (std::size_t i = n - tail; i < n; ++i) mean += log.records[i].train_nll;
  return mean / static_cast<double>(tail);
}

}  // namespace glunet
