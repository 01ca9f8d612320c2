#pragma once

#include <optional>
#include <string>
#include <vector>

#include "glunet/arch.hpp"
#include "glunet/binder.hpp"
#include "glunet/graph.hpp"
#include "glunet/head.hpp"
#include "glunet/init.hpp"
#include "glunet/param.hpp"

namespace glunet {

/// One convolutional layer in a chosen activation variant. The linear path
/// is x*W+b; gated variants add a second causal convolution for the gates.
template <typename T>
struct GatedConvLayerT {
  GateKind kind = GateKind::GLU;
  int kernel = 1, in_ch = 0, out_ch = 0;
  ParameterT<T> w, b;
  ParameterT<T> v, c;  // gate path; unused for ReLU/Tanh/Linear

  static GatedConvLayerT init(GateKind kind, int kernel, int in_ch, int out_ch, Rng& rng,
                              bool weight_norm, const std::string& name) {
    GatedConvLayerT l;
    l.kind = kind;
    l.kernel = kernel;
    l.in_ch = in_ch;
    l.out_ch = out_ch;
    auto wrap = [&](std::string n, TensorT<T> t) {
      return weight_norm ? ParameterT<T>::normed(n, std::move(t)) : ParameterT<T>::plain(n, std::move(t));
    };
    l.w = wrap(name + ".w", kaiming_tensor<T>(rng, {kernel, in_ch, out_ch}, kernel * in_ch));
    l.b = ParameterT<T>::plain(name + ".b", TensorT<T>::zeros({out_ch}));
    if (gate_has_second_path(kind)) {
      l.v = wrap(name + ".v", kaiming_tensor<T>(rng, {kernel, in_ch, out_ch}, kernel * in_ch));
      l.c = ParameterT<T>::plain(name + ".c", TensorT<T>::zeros({out_ch}));
    }
    return l;
  }

  int forward(GraphT<T>& g, ParamBinder<T>& binder, int x) {
    const int lin = conv1d_causal(g, x, binder.bind(w), binder.bind(b));
    switch (kind) {
      case GateKind::Linear:
        return lin;
      case GateKind::ReLU:
        return relu(g, lin);
      case GateKind::Tanh:
        return tanh(g, lin);
      case GateKind::GLU:
        return mul(g, lin, sigmoid(g, conv1d_causal(g, x, binder.bind(v), binder.bind(c))));
      case GateKind::GTU:
        return mul(g, tanh(g, lin), sigmoid(g, conv1d_causal(g, x, binder.bind(v), binder.bind(c))));
      case GateKind::Bilinear:
        return mul(g, lin, conv1d_causal(g, x, binder.bind(v), binder.bind(c)));
    }
    throw ContractError("gated layer: unknown gate kind");
  }

  void collect(std::vector<ParameterT<T>*>& out) {
    out.push_back(&w);
    out.push_back(&b);
    if (gate_has_second_path(kind)) {
      out.push_back(&v);
      out.push_back(&c);
    }
  }
};

/// Pre-activation residual block: out = inner_stack(x) + project(x), where
/// project is identity when widths match and a learned k=1 linear map
/// otherwise.
template <typename T>
struct ResidualBlockT {
  std::vector<GatedConvLayerT<T>> layers;
  std::optional<ParameterT<T>> projection;  // [in x out]
  int in_ch = 0, out_ch = 0;

  static ResidualBlockT init(const std::vector<ConvTap>& taps, GateKind gate, int in_ch, Rng& rng,
                             bool weight_norm, const std::string& name) {
    ResidualBlockT blk;
    blk.in_ch = in_ch;
    int cur = in_ch;
    for (std::size_t i = 0; i < taps.size(); ++i) {
      blk.layers.push_back(GatedConvLayerT<T>::init(gate, taps[i].k, cur, taps[i].n, rng, weight_norm,
                                                    name + ".layer" + std::to_string(i)));
      cur = taps[i].n;
    }
    blk.out_ch = cur;
    if (blk.in_ch != blk.out_ch) {
      auto p0 = kaiming_tensor<T>(rng, {blk.in_ch, blk.out_ch}, blk.in_ch);
      blk.projection = weight_norm ? ParameterT<T>::normed(name + ".proj", std::move(p0))
                                   : ParameterT<T>::plain(name + ".proj", std::move(p0));
    }
    return blk;
  }

  int forward(GraphT<T>& g, ParamBinder<T>& binder, int x) {
    int h = x;
    for (auto& layer : layers) h = layer.forward(g, binder, h);
    const int skip = projection ? matmul(g, x, binder.bind(*projection)) : x;
    return add(g, h, skip);
  }

  void collect(std::vector<ParameterT<T>*>& out) {
    for (auto& l : layers) l.collect(out);
    if (projection) out.push_back(&*projection);
  }
};

/// The full network: lookup table, residual stack, output head.
template <typename T>
struct ModelT {
  ArchSpec arch;
  int vocab = 0;
  bool weight_norm = true;
  ParameterT<T> embedding;  // [|V| x e], never weight-normalized
  std::vector<ResidualBlockT<T>> blocks;
  HeadT<T> head;

  ModelT() = default;

  ModelT(ArchSpec spec, int vocab_size, Rng& rng, bool use_weight_norm = true) {
    spec.validate();
    if (vocab_size < 1) throw ContractError("model: vocabulary is empty");
    arch = std::move(spec);
    vocab = vocab_size;
    weight_norm = use_weight_norm;
    embedding = ParameterT<T>::plain("embed", kaiming_tensor<T>(rng, {vocab, arch.embed_dim}, arch.embed_dim));
    int in = arch.embed_dim;
    int index = 0;
    for (const auto& bspec : arch.blocks) {
      for (int r = 0; r < bspec.repeat; ++r) {
        blocks.push_back(ResidualBlockT<T>::init(bspec.taps, arch.gate, in, rng, weight_norm,
                                                 "block" + std::to_string(index++)));
        in = blocks.back().out_ch;
      }
    }
    const int d = in;
    if (arch.cutoffs.empty()) {
      head = FullSoftmaxHeadT<T>::init(d, vocab, rng, weight_norm);
    } else {
      head = AdaptiveSoftmaxHeadT<T>::init(d, AdaptiveCutoffs::for_vocab(arch.cutoffs, vocab),
                                           arch.tail_proj_divisor, rng, weight_norm);
    }
  }

  /// Context representation H for one token row. Rows flagged invalid (the
  /// nonexistent prefix before a stream start) are forced to zero after the
  /// embedding and after every block, which reproduces the left zero-padding
  /// a longer sequence would have seen at every depth.
  int forward_states(GraphT<T>& g, ParamBinder<T>& binder, const std::vector<int>& tokens,
                     const std::vector<T>* row_valid = nullptr) {
    if (row_valid && row_valid->size() != tokens.size()) {
      throw DimensionError("forward: validity flags do not match token count");
    }
    int h = embedding_lookup(g, binder.bind(embedding), tokens);
    if (row_valid) h = row_scale(g, h, *row_valid);
    for (auto& blk : blocks) {
      h = blk.forward(g, binder, h);
      if (row_valid) h = row_scale(g, h, *row_valid);
    }
    return h;
  }

  /// log p(target_i | tokens <= i) for one row; targets align with positions.
  int score(GraphT<T>& g, ParamBinder<T>& binder, const std::vector<int>& tokens,
            const std::vector<int>& targets, const std::vector<T>* row_valid = nullptr) {
    const int h = forward_states(g, binder, tokens, row_valid);
    return head_logprob(head, g, binder, h, targets);
  }

  std::vector<ParameterT<T>*> parameters() {
    std::vector<ParameterT<T>*> out;
    out.push_back(&embedding);
    for (auto& blk : blocks) blk.collect(out);
    head_collect(head, out);
    return out;
  }

  std::int64_t param_count() {
    std::int64_t total = 0;
    for (auto* p : parameters()) total += static_cast<std::int64_t>(p->param_count());
    return total;
  }

  int output_dim() const { return arch.output_dim(); }
  int receptive_field() const { return arch.receptive_field(); }
};

using ModelF = ModelT<float>;
using ModelD = ModelT<double>;

}  // namespace glunet
