#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "glunet/model.hpp"

namespace glunet {

/// Tokens/s measurements for one model. Throughput batches many sequences;
/// responsiveness scores strictly one token at a time; seq_parallel scores a
/// single sequence with one parallel-over-positions forward (both readings
/// of sequential speed are reported).
struct BenchReport {
  double throughput_tps = 0;
  double responsiveness_tps = 0;
  double seq_parallel_tps = 0;
  int batch = 0;
  int length = 0;
  int stream_length = 0;
  int warmup_iters = 0;
  int measured_iters = 0;
  double timer_resolution_s = 0;

  std::string csv_header() const;
  std::string csv_row() const;
  std::string summary() const;
};

struct BenchOptions {
  int batch = 750;
  int length = 20;
  int stream_length = 15000;
  int iterations = 5;
  int warmup = 2;
  std::uint64_t seed = 1;
};

double estimate_timer_resolution();

/// (batch * length * iterations) / seconds of full forward scoring,
/// output head included. Warmup iterations are excluded from timing.
double measure_throughput(ModelF& model, int batch, int length, int iterations, int warmup,
                          std::uint64_t seed);

/// Strictly sequential scoring: one token at a time through a rolling
/// receptive-field window.
double measure_responsiveness(ModelF& model, int stream_length, std::uint64_t seed);

/// One sequence scored with a single full forward (parallel over positions).
double measure_seq_parallel(ModelF& model, int length, int iterations, int warmup, std::uint64_t seed);

BenchReport run_bench(ModelF& model, const BenchOptions& opts);

/// Per-position log p(stream[i+1] | stream[..i]) via the rolling window;
/// matches full-forward scores at every position.
std::vector<float> incremental_scores(ModelF& model, const std::vector<int>& stream);

std::vector<float> full_forward_scores(ModelF& model, const std::vector<int>& stream);

/// Median wall seconds to score one token at the given stream position.
double per_token_latency(ModelF& model, const std::vector<int>& stream, long position, int repeats = 5);

std::vector<int> random_token_stream(int vocab, std::size_t length, std::uint64_t seed);

}  // namespace glunet
