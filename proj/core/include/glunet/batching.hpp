#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "glunet/vocab.hpp"

namespace glunet {

enum class SequenceMode { Sentence, Paragraph };

SequenceMode sequence_mode_from_string(const std::string& s);
const char* to_string(SequenceMode m);

/// Integer token matrices with target alignment and a loss mask.
/// targets[b][t] == inputs[b][t+1] within a sequence; <s> is never an
/// unmasked target, </s> is. carry_cols marks a context prefix carried from
/// the previous contiguous batch whose predictions are masked; input_valid
/// is 0 on rows that do not exist in the stream (before its start).
struct Batch {
  int rows = 0;
  int cols = 0;
  int carry_cols = 0;
  std::vector<int> inputs;        // rows x cols
  std::vector<int> targets;       // rows x cols
  std::vector<float> mask;        // rows x cols, {0,1}
  std::vector<char> input_valid;  // rows x cols, {0,1}

  int input(int b, int t) const { return inputs[static_cast<std::size_t>(b) * cols + t]; }
  int target(int b, int t) const { return targets[static_cast<std::size_t>(b) * cols + t]; }
  float mask_at(int b, int t) const { return mask[static_cast<std::size_t>(b) * cols + t]; }
  bool valid_at(int b, int t) const { return input_valid[static_cast<std::size_t>(b) * cols + t] != 0; }
  double unmasked() const;
};

std::vector<std::string> tokenize_whitespace(const std::string& text);

/// Splits text into units (lines in sentence mode, blank-line-delimited
/// paragraphs otherwise) and encodes each as <s>, ids..., </s>. Empty units
/// are skipped.
std::vector<std::vector<int>> encode_lines(const std::string& text, const Vocabulary& vocab,
                                           SequenceMode mode);

std::vector<std::string> decode(const std::vector<int>& ids, const Vocabulary& vocab);

/// Independent sentences: length-bucketed, right-padded, batch order
/// shuffled deterministically by seed.
std::vector<Batch> batch_sentences(const std::vector<std::vector<int>>& seqs, int batch_size,
                                   std::uint64_t seed);

/// Contiguous stream split into `lanes` parallel lanes of `unroll`-token
/// steps; every batch carries the previous `carry` input tokens (masked) so
/// each unmasked target keeps its full receptive field across batch
/// boundaries.
std::vector<Batch> batch_contiguous(const std::vector<std::vector<int>>& seqs, int lanes, int unroll,
                                    int carry);

std::vector<int> concat_stream(const std::vector<std::vector<int>>& seqs);

}  // namespace glunet
