#include "glunet/train.hpp"

#include <chrono>
#include <cmath>

namespace glunet {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<float> row_valid_slice(const Batch& b, int row) {
  std::vector<float> valid(b.cols);
  bool all = true;
  for (int t = 0; t < b.cols; ++t) {
    valid[t] = b.valid_at(row, t) ? 1.0f : 0.0f;
    all = all && b.valid_at(row, t);
  }
  if (all) return {};  // empty means "no masking needed"
  return valid;
}

/// Flattened row-major logprob node over every position of the batch.
int batch_logprob(ModelF& model, GraphF& g, ParamBinder<float>& binder, const Batch& batch) {
  std::vector<int> hrows;
  hrows.reserve(batch.rows);
  for (int r = 0; r < batch.rows; ++r) {
    std::vector<int> tokens(batch.inputs.begin() + static_cast<std::ptrdiff_t>(r) * batch.cols,
                            batch.inputs.begin() + static_cast<std::ptrdiff_t>(r + 1) * batch.cols);
    const std::vector<float> valid = row_valid_slice(batch, r);
    hrows.push_back(model.forward_states(g, binder, tokens, valid.empty() ? nullptr : &valid));
  }
  const int h = batch.rows == 1 ? hrows[0] : vconcat(g, hrows);
  return head_logprob(model.head, g, binder, h, batch.targets);
}

std::vector<Batch> make_batches(const std::vector<std::vector<int>>& seqs, const TrainOptions& opts,
                                int receptive_field, std::uint64_t epoch) {
  if (opts.mode == SequenceMode::Sentence) {
    return batch_sentences(seqs, opts.batch_size, opts.seed * 0x9e3779b9ull + epoch);
  }
  // Order is the point of contiguous mode, so epochs repeat the same stream.
  return batch_contiguous(seqs, opts.batch_size, opts.unroll, receptive_field - 1);
}

}  // namespace

std::vector<float> score_batch(ModelF& model, const Batch& batch) {
  GraphF g;
  g.grad_enabled = false;
  ParamBinder<float> binder(g);
  const int lp = batch_logprob(model, g, binder, batch);
  return g.value(lp).data;
}

TrainResult train_model(ModelF& model, const std::vector<std::vector<int>>& train_seqs,
                        const std::vector<std::vector<int>>* valid_seqs, const TrainOptions& opts) {
  opts.optim.validate();
  if (train_seqs.empty()) throw ContractError("train: no training sequences");

  const auto params = model.parameters();
  const auto start = Clock::now();

  TrainResult result;
  long planned_steps = -1;
  std::vector<Batch> batches = make_batches(train_seqs, opts, model.receptive_field(), 0);
  if (batches.empty()) throw ContractError("train: batching produced no batches");
  switch (opts.budget.kind) {
    case TrainBudget::Kind::Steps:
      planned_steps = static_cast<long>(opts.budget.amount);
      break;
    case TrainBudget::Kind::Epochs:
      planned_steps = static_cast<long>(opts.budget.amount) * static_cast<long>(batches.size());
      break;
    case TrainBudget::Kind::Seconds:
      planned_steps = -1;
      break;
  }
  const int eval_every = opts.eval_every > 0 ? opts.eval_every
                         : opts.eval_every == 0
                             ? static_cast<int>(std::max<long>(1, (planned_steps > 0 ? planned_steps : 1000) / 20))
                             : -1;

  long step = 0;
  int epoch = 0;
  bool done = planned_steps == 0;
  while (!done) {
    if (epoch > 0) batches = make_batches(train_seqs, opts, model.receptive_field(), epoch);
    for (const Batch& batch : batches) {
      GraphF g;
      ParamBinder<float> binder(g);
      const int lp = batch_logprob(model, g, binder, batch);
      const TensorF mask({batch.rows * batch.cols}, std::vector<float>(batch.mask));
      const int loss_sum = nll_masked(g, lp, mask);
      const double count = mask_count(batch.mask);
      const int loss = scale(g, loss_sum, 1.0 / count);

      const double batch_nll = static_cast<double>(g.value(loss).data[0]);
      if (!std::isfinite(batch_nll)) {
        if (opts.abort_on_divergence) {
          throw TrainingDiverged(step, result.log.records.empty() ? 0.0 : result.log.records.back().grad_norm,
                                 opts.optim.learning_rate);
        }
        result.diverged = true;
        result.final_train_nll = batch_nll;
        return result;
      }

      g.backward(loss);
      for (auto* p : params) p->zero_grad();
      binder.pull_grads();
      const double pre_norm = opts.clip ? clip_global(params, opts.optim.clip_threshold)
                                        : global_grad_norm(params);
      nesterov_step(params, opts.optim);

      ++step;
      result.tokens += static_cast<long>(count);
      result.final_train_nll = batch_nll;

      StepRecord rec;
      rec.step = step;
      rec.epoch = epoch;
      rec.tokens = result.tokens;
      rec.seconds = seconds_since(start);
      rec.train_nll = batch_nll;
      rec.grad_norm = pre_norm;
      if (valid_seqs && eval_every > 0 && step % eval_every == 0) {
        rec.val_ppl = perplexity(model, *valid_seqs, opts.mode, opts.batch_size, opts.unroll);
      }
      result.log.append(rec);

      if (planned_steps >= 0 && step >= planned_steps) {
        done = true;
        break;
      }
      if (opts.budget.kind == TrainBudget::Kind::Seconds && seconds_since(start) >= opts.budget.amount) {
        done = true;
        break;
      }
    }
    ++epoch;
  }
  result.steps = step;
  if (valid_seqs) {
    result.final_val_ppl = perplexity(model, *valid_seqs, opts.mode, opts.batch_size, opts.unroll);
  }
  return result;
}

double perplexity(ModelF& model, const std::vector<std::vector<int>>& seqs, SequenceMode mode,
                  int batch_size, int unroll) {
  if (seqs.empty()) throw ContractError("perplexity: empty evaluation set");
  const std::vector<Batch> batches =
      mode == SequenceMode::Sentence
          ? batch_sentences(seqs, batch_size, /*seed=*/0)
          : batch_contiguous(seqs, batch_size, unroll, model.receptive_field() - 1);
  double total = 0, count = 0;
  for (const Batch& batch : batches) {
    const std::vector<float> lp = score_batch(model, batch);
    for (std::size_t i = 0; i < lp.size(); ++i) {
      if (batch.mask[i] != 0.0f) {
        total -= static_cast<double>(lp[i]);
        count += 1;
      }
    }
  }
  if (count == 0) throw ContractError("perplexity: nothing to predict in evaluation set");
  return std::exp(total / count);
}

double perplexity_whole_stream(ModelF& model, const std::vector<int>& stream) {
  if (stream.size() < 2) throw ContractError("perplexity: stream too short");
  Batch b;
  b.rows = 1;
  b.cols = static_cast<int>(stream.size()) - 1;
  b.inputs.assign(stream.begin(), stream.end() - 1);
  b.targets.assign(stream.begin() + 1, stream.end());
  b.mask.resize(b.cols);
  b.input_valid.assign(b.cols, 1);
  for (int t = 0; t < b.cols; ++t) b.mask[t] = b.targets[t] == Vocabulary::kBos ? 0.0f : 1.0f;
  const std::vector<float> lp = score_batch(model, b);
  double total = 0, count = 0;
  for (int t = 0; t < b.cols; ++t) {
    if (b.mask[t] != 0.0f) {
      total -= static_cast<double>(lp[t]);
      count += 1;
    }
  }
  if (count == 0) throw ContractError("perplexity: nothing to predict in stream");
  return std::exp(total / count);
}

double perplexity_windowed(ModelF& model, const std::vector<int>& stream, int window,
                           int rows_per_graph) {
  if (window < 1) throw ContractError("perplexity: window must be >= 1");
  if (stream.size() < 2) throw ContractError("perplexity: stream too short");
  std::vector<long> positions;  // target indices
  for (long t = 1; t < static_cast<long>(stream.size()); ++t) {
    if (stream[t] != Vocabulary::kBos) positions.push_back(t);
  }
  if (positions.empty()) throw ContractError("perplexity: nothing to predict in stream");

  double total = 0, count = 0;
  for (std::size_t base = 0; base < positions.size(); base += rows_per_graph) {
    const std::size_t rows = std::min<std::size_t>(rows_per_graph, positions.size() - base);
    GraphF g;
    g.grad_enabled = false;
    ParamBinder<float> binder(g);
    std::vector<int> last_rows;
    std::vector<int> targets;
    std::vector<int> hparts;
    for (std::size_t r = 0; r < rows; ++r) {
      const long t = positions[base + r];
      std::vector<int> tokens(window, 0);
      std::vector<float> valid(window, 0.0f);
      bool all_valid = true;
      for (int j = 0; j < window; ++j) {
        const long src = t - window + j;
        if (src >= 0) {
          tokens[j] = stream[src];
          valid[j] = 1.0f;
        } else {
          all_valid = false;
        }
      }
      const int h = model.forward_states(g, binder, tokens, all_valid ? nullptr : &valid);
      hparts.push_back(take_rows(g, h, {window - 1}));
      targets.push_back(stream[t]);
    }
    const int h = hparts.size() == 1 ? hparts[0] : vconcat(g, hparts);
    const int lp = head_logprob(model.head, g, binder, h, targets);
    for (float v : g.value(lp).data) total -= static_cast<double>(v);
    count += static_cast<double>(rows);
  }
  return std::exp(total / count);
}

}  // namespace glunet
