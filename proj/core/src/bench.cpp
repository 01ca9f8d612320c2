#include "glunet/bench.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <sstream>

#include "glunet/batching.hpp"
#include "glunet/train.hpp"

namespace glunet {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

/// Scores one target from a window ending right before it. Window length is
/// the receptive field, so the result equals the full-forward score.
float score_one_position(ModelF& model, const std::vector<int>& stream, long target_index, int window) {
  GraphF g;
  g.grad_enabled = false;
  ParamBinder<float> binder(g);
  std::vector<int> tokens(window, 0);
  std::vector<float> valid(window, 0.0f);
  bool all_valid = true;
  for (int j = 0; j < window; ++j) {
    const long src = target_index - window + j;
    if (src >= 0) {
      tokens[j] = stream[src];
      valid[j] = 1.0f;
    } else {
      all_valid = false;
    }
  }
  const int h = model.forward_states(g, binder, tokens, all_valid ? nullptr : &valid);
  const int last = take_rows(g, h, {window - 1});
  const int lp = head_logprob(model.head, g, binder, last, {stream[target_index]});
  return g.value(lp).data[0];
}

Batch random_batch(int vocab, int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> tok(0, vocab - 1);
  Batch b;
  b.rows = rows;
  b.cols = cols;
  b.inputs.resize(static_cast<std::size_t>(rows) * cols);
  b.targets.resize(static_cast<std::size_t>(rows) * cols);
  b.mask.assign(static_cast<std::size_t>(rows) * cols, 1.0f);
  b.input_valid.assign(static_cast<std::size_t>(rows) * cols, 1);
  for (auto& x : b.inputs) x = tok(rng);
  for (auto& x : b.targets) x = tok(rng);
  return b;
}

}  // namespace

std::vector<int> random_token_stream(int vocab, std::size_t length, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> tok(0, vocab - 1);
  std::vector<int> stream(length);
  for (auto& x : stream) x = tok(rng);
  return stream;
}

double estimate_timer_resolution() {
  double best = 1.0;
  for (int probe = 0; probe < 16; ++probe) {
    auto a = Clock::now();
    auto b = a;
    while (b == a) b = Clock::now();
    best = std::min(best, seconds_between(a, b));
  }
  return best;
}

double measure_throughput(ModelF& model, int batch, int length, int iterations, int warmup,
                          std::uint64_t seed) {
  if (batch < 1 || length < 1 || iterations < 1) {
    throw ContractError("bench: batch, length and iterations must be >= 1");
  }
  // Fail on absurd geometry before timing anything.
  const double activation_bytes = static_cast<double>(batch) * length *
                                  std::max(model.output_dim(), model.arch.embed_dim) * 4.0 *
                                  (2.0 * model.arch.conv_layer_count() + 4.0);
  if (activation_bytes > 8e9) throw ContractError("bench: geometry needs too much memory");

  const Batch b = random_batch(model.vocab, batch, length, seed);
  for (int i = 0; i < warmup; ++i) score_batch(model, b);

  const double resolution = estimate_timer_resolution();
  double elapsed = 0;
  long iters = 0;
  // Repeat until the measured span dwarfs the timer resolution.
  while (iters < iterations || elapsed < 100 * resolution) {
    const auto t0 = Clock::now();
    score_batch(model, b);
    elapsed += seconds_between(t0, Clock::now());
    ++iters;
  }
  return static_cast<double>(batch) * length * static_cast<double>(iters) / elapsed;
}

double measure_responsiveness(ModelF& model, int stream_length, std::uint64_t seed) {
  if (stream_length < 2) throw ContractError("bench: stream too short");
  const std::vector<int> stream = random_token_stream(model.vocab, static_cast<std::size_t>(stream_length), seed);
  const int window = model.receptive_field();
  // Warm up on a short prefix.
  for (long t = 1; t < std::min<long>(8, stream_length); ++t) score_one_position(model, stream, t, window);

  const auto t0 = Clock::now();
  for (long t = 1; t < stream_length; ++t) score_one_position(model, stream, t, window);
  const double elapsed = seconds_between(t0, Clock::now());
  return static_cast<double>(stream_length - 1) / elapsed;
}

double measure_seq_parallel(ModelF& model, int length, int iterations, int warmup, std::uint64_t seed) {
  return measure_throughput(model, 1, length, iterations, warmup, seed);
}

BenchReport run_bench(ModelF& model, const BenchOptions& opts) {
  BenchReport r;
  r.batch = opts.batch;
  r.length = opts.length;
  r.stream_length = opts.stream_length;
  r.warmup_iters = opts.warmup;
  r.measured_iters = opts.iterations;
  r.timer_resolution_s = estimate_timer_resolution();
  r.throughput_tps = measure_throughput(model, opts.batch, opts.length, opts.iterations, opts.warmup, opts.seed);
  r.responsiveness_tps = measure_responsiveness(model, opts.stream_length, opts.seed);
  r.seq_parallel_tps = measure_seq_parallel(model, opts.length, opts.iterations, opts.warmup, opts.seed);
  return r;
}

std::vector<float> incremental_scores(ModelF& model, const std::vector<int>& stream) {
  if (stream.size() < 2) throw ContractError("bench: stream too short");
  const int window = model.receptive_field();
  std::vector<float> out;
  out.reserve(stream.size() - 1);
  for (long t = 1; t < static_cast<long>(stream.size()); ++t) {
    out.push_back(score_one_position(model, stream, t, window));
  }
  return out;
}

std::vector<float> full_forward_scores(ModelF& model, const std::vector<int>& stream) {
  if (stream.size() < 2) throw ContractError("bench: stream too short");
  Batch b;
  b.rows = 1;
  b.cols = static_cast<int>(stream.size()) - 1;
  b.inputs.assign(stream.begin(), stream.end() - 1);
  b.targets.assign(stream.begin() + 1, stream.end());
  b.mask.assign(b.cols, 1.0f);
  b.input_valid.assign(b.cols, 1);
  return score_batch(model, b);
}

double per_token_latency(ModelF& model, const std::vector<int>& stream, long position, int repeats) {
  if (position < 1 || position >= static_cast<long>(stream.size())) {
    throw ContractError("bench: position out of stream");
  }
  const int window = model.receptive_field();
  score_one_position(model, stream, position, window);  // warmup
  std::vector<double> times;
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = Clock::now();
    score_one_position(model, stream, position, window);
    times.push_back(seconds_between(t0, Clock::now()));
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

std::string BenchReport::csv_header() const {
  return "throughput_tps,responsiveness_tps,seq_parallel_tps,batch,length,stream_length,warmup_iters,"
         "measured_iters,timer_resolution_s";
}

std::string BenchReport::csv_row() const {
  std::ostringstream os;
  os.precision(10);
  os << throughput_tps << ',' << responsiveness_tps << ',' << seq_parallel_tps << ',' << batch << ','
     << length << ',' << stream_length << ',' << warmup_iters << ',' << measured_iters << ','
     << timer_resolution_s;
  return os.str();
}

std::string BenchReport::summary() const {
  std::ostringstream os;
  os.precision(6);
  os << "throughput      " << throughput_tps << " tokens/s  (batch " << batch << " x length " << length
     << ")\n"
     << "responsiveness  " << responsiveness_tps << " tokens/s  (one token at a time, stream "
     << stream_length << ")\n"
     << "seq-parallel    " << seq_parallel_tps << " tokens/s  (single sequence, parallel positions)";
  return os.str();
}

}  // namespace glunet
