#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "glunet/arch.hpp"
#include "glunet/model.hpp"
#include "glunet/runlog.hpp"
#include "glunet/train.hpp"

namespace glunet {

struct SweepOptions {
  long steps = 300;
  int batch_size = 16;
  int unroll = 32;
  SequenceMode mode = SequenceMode::Sentence;
  int seeds = 3;
  std::uint64_t first_seed = 1;
  int jobs = 1;
  OptimizerConfig optim;
  int eval_every = 0;  // 0 = auto cadence (about 20 evaluation points)
  // Base architecture for generated variants.
  int embed = 48;
  int width = 48;
  int depth = 5;
  int kernel = 4;
};

struct SweepArm {
  std::string label;
  std::uint64_t seed = 0;
  ArchSpec arch;
  bool weight_norm = true;
  bool clip = true;
  double learning_rate = 1.0;
  std::int64_t params = 0;
  double final_ppl = 0;   // +inf when diverged
  double final_nll = 0;   // trailing-window mean of train NLL
  bool diverged = false;
  RunLog log;
};

struct SweepReport {
  std::vector<SweepArm> arms;

  std::vector<std::string> labels() const;
  double median_ppl(const std::string& label) const;
  std::string to_csv() const;  // label,seed,params,lr,clip,weight_norm,final_ppl,final_nll,diverged
};

/// Trains one model per gate kind under an identical budget and seed set,
/// widths auto-adjusted so parameter counts match the GLU reference within
/// 5%.
SweepReport gating_sweep(const std::vector<std::vector<int>>& train_seqs,
                         const std::vector<std::vector<int>>& valid_seqs, int vocab_size,
                         const std::vector<GateKind>& gates, const SweepOptions& opts);

/// gating_sweep fixed to {GLU, Bilinear, Linear}.
SweepReport nonlinearity_sweep(const std::vector<std::vector<int>>& train_seqs,
                               const std::vector<std::vector<int>>& valid_seqs, int vocab_size,
                               const SweepOptions& opts);

/// Trains one model per requested receptive-field window, kernel/depth
/// combos chosen so the receptive field equals the window and parameter
/// counts match within 10%.
SweepReport context_sweep(const std::vector<std::vector<int>>& train_seqs,
                          const std::vector<std::vector<int>>& valid_seqs, int vocab_size,
                          const std::vector<int>& windows, const SweepOptions& opts);

/// One pass over the training data for every {clip on/off, weight-norm
/// on/off} configuration, each re-tuned over a small learning-rate grid.
/// Divergence is recorded as PPL = +inf and the sweep continues.
SweepReport training_ablation(const std::vector<std::vector<int>>& train_seqs,
                              const std::vector<std::vector<int>>& valid_seqs, int vocab_size,
                              const SweepOptions& opts);

/// Width whose parameter count lands closest to the target for the given
/// arch template (every conv width scaled together).
ArchSpec fit_width_to_params(ArchSpec arch, int vocab_size, std::int64_t target_params);

/// Architecture with receptive field exactly `window` built from k<=4 layers.
ArchSpec arch_for_window(int window, int embed, int width, GateKind gate);

/// Delay-indexed affine map equivalent to a purely linear model's stack:
/// H[i] = sum_d E[i-d] * delay_mats[d] + bias, matching the model exactly at
/// positions past the padding region (i >= receptive_field - 1).
struct LinearAffineMap {
  std::vector<TensorF> delay_mats;  // delay_mats[d] is [m x n]
  TensorF bias;                     // [n]
};

LinearAffineMap collapse_linear_model(ModelF& model);
TensorF apply_affine(const LinearAffineMap& map, const TensorF& embedded);

/// First tokens-seen value at which the arm's smoothed train NLL reaches the
/// target; -1 when it never does.
long tokens_to_reach_nll(const RunLog& log, double target_nll, int smooth_window = 5);

/// Trailing-window mean of train NLL at the end of a run.
double final_smoothed_nll(const RunLog& log, double tail_fraction = 0.1);

}  // namespace glunet
