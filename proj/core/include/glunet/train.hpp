#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "glunet/batching.hpp"
#include "glunet/model.hpp"
#include "glunet/optim.hpp"
#include "glunet/runlog.hpp"

namespace glunet {

/// Raised when a training step produces a non-finite loss.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(long step, double grad_norm, double lr)
      : std::runtime_error("training diverged at step " + std::to_string(step) +
                           " (last gradient norm " + std::to_string(grad_norm) + ", learning rate " +
                           std::to_string(lr) + ")"),
        step(step),
        last_grad_norm(grad_norm),
        learning_rate(lr) {}
  long step;
  double last_grad_norm;
  double learning_rate;
};

struct TrainBudget {
  enum class Kind { Steps, Epochs, Seconds };
  Kind kind = Kind::Steps;
  double amount = 0;

  static TrainBudget steps(long n) { return {Kind::Steps, static_cast<double>(n)}; }
  static TrainBudget epochs(int n) { return {Kind::Epochs, static_cast<double>(n)}; }
  static TrainBudget seconds(double s) { return {Kind::Seconds, s}; }
};

struct TrainOptions {
  OptimizerConfig optim;
  bool clip = true;  // weight norm is a model-construction property
  int batch_size = 16;
  int unroll = 32;  // contiguous-mode step length
  SequenceMode mode = SequenceMode::Sentence;
  std::uint64_t seed = 1;
  TrainBudget budget = TrainBudget::steps(0);
  int eval_every = 0;  // 0 = auto (about 20 points), -1 = never
  bool abort_on_divergence = true;
};

struct TrainResult {
  RunLog log;
  long steps = 0;
  long tokens = 0;
  double final_train_nll = 0;
  double final_val_ppl = 0;  // 0 when no validation stream was given
  bool diverged = false;
};

/// Runs forward -> nll -> backward -> clip -> Nesterov step per batch until
/// the budget is exhausted. Deterministic under a fixed seed.
TrainResult train_model(ModelF& model, const std::vector<std::vector<int>>& train_seqs,
                        const std::vector<std::vector<int>>* valid_seqs, const TrainOptions& opts);

/// exp(total masked NLL / masked count) over the stream, accumulated in
/// 64-bit. Counts every predicted token including </s>, never <s>.
double perplexity(ModelF& model, const std::vector<std::vector<int>>& seqs, SequenceMode mode,
                  int batch_size = 16, int unroll = 64);

/// Single-graph evaluation of one concatenated stream, no batching.
double perplexity_whole_stream(ModelF& model, const std::vector<int>& stream);

/// Context-truncated probe: every target is scored from a rolling window of
/// the last `window` tokens only.
double perplexity_windowed(ModelF& model, const std::vector<int>& stream, int window,
                           int rows_per_graph = 128);

/// Masked log-probabilities of each batch position, flattened row-major.
/// Shared by training, evaluation and the bench scorers.
std::vector<float> score_batch(ModelF& model, const Batch& batch);

}  // namespace glunet
