#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace glunet {

/// Malformed or inconsistent configuration text.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class GateKind { GLU, GTU, ReLU, Tanh, Linear, Bilinear };

/// GLU, GTU and Bilinear carry a second convolution path (V, c).
bool gate_has_second_path(GateKind k);
const char* to_string(GateKind k);
GateKind gate_from_string(const std::string& s);

struct ConvTap {
  int k = 1;  // kernel width
  int n = 1;  // output units
  bool operator==(const ConvTap&) const = default;
};

/// One residual block shape: the layers inside the block, how many copies of
/// the block appear in sequence, and whether it is a bottleneck.
struct BlockSpec {
  std::vector<ConvTap> taps;
  int repeat = 1;
  bool bottleneck = false;

  void validate() const;  // throws DimensionError with the broken rule
  bool operator==(const BlockSpec&) const = default;
};

/// Declarative network description: embedding size, ordered block specs,
/// gate kind, adaptive-softmax cutoffs (empty = full softmax) and an optional
/// context-window cap used by evaluation sweeps.
struct ArchSpec {
  int embed_dim = 0;
  std::vector<BlockSpec> blocks;
  GateKind gate = GateKind::GLU;
  std::vector<int> cutoffs;
  std::optional<int> context_window;
  int tail_proj_divisor = 4;

  void validate() const;

  /// 1 + sum of (k-1) over every convolution layer, repeats included.
  int receptive_field() const;

  /// Output width after the last block (embed_dim when there are none).
  int output_dim() const;

  std::int64_t conv_layer_count() const;

  bool operator==(const ArchSpec&) const = default;
};

/// Parses the one-key-per-line config format:
///   embed=280
///   conv=[4,900]x1          (repeatable, ordered; B prefix marks bottlenecks)
///   conv=B[1,128;5,128;1,512]x3
///   gate=glu
///   cutoffs=2000,10000
///   context_window=40
/// Errors carry the offending line number.
ArchSpec parse_arch(const std::string& text);

/// Inverse of parse_arch on valid specs.
std::string render_arch(const ArchSpec& spec);

/// Cluster end positions for a cutoff list bound to a vocabulary: configured
/// cutoffs below |V| in increasing order, then |V| itself. The first entry is
/// the head shortlist size.
std::vector<int> effective_cutoffs(const std::vector<int>& cutoffs, int vocab_size);

/// Trainable scalar count for a spec bound to a vocabulary size; matches the
/// tensors the model allocates exactly.
std::int64_t count_params(const ArchSpec& spec, int vocab_size);

}  // namespace glunet
