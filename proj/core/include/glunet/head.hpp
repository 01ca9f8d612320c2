#pragma once

#include <string>
#include <variant>
#include <vector>

#include "glunet/arch.hpp"
#include "glunet/binder.hpp"
#include "glunet/graph.hpp"
#include "glunet/init.hpp"
#include "glunet/param.hpp"

namespace glunet {

/// Frequency-ordered cluster boundaries over a vocabulary whose ids are
/// already sorted by descending frequency. ends = {c0, c1, ..., |V|}; the
/// head shortlist is [0, c0), tail j covers [ends[j], ends[j+1]).
struct AdaptiveCutoffs {
  std::vector<int> ends;

  static AdaptiveCutoffs for_vocab(const std::vector<int>& cutoffs, int vocab_size) {
    AdaptiveCutoffs c{effective_cutoffs(cutoffs, vocab_size)};
    c.validate();
    return c;
  }

  void validate() const {
    if (ends.empty() || ends[0] < 1) throw ContractError("adaptive cutoffs: head shortlist must be >= 1");
    for (std::size_t i = 1; i < ends.size(); ++i) {
      if (ends[i] <= ends[i - 1]) throw ContractError("adaptive cutoffs: boundaries must increase");
    }
  }

  int vocab_size() const { return ends.back(); }
  int shortlist() const { return ends.front(); }
  int tail_count() const { return static_cast<int>(ends.size()) - 1; }

  /// -1 for a shortlist word, otherwise the tail cluster index.
  int cluster_of(int id) const {
    if (id < 0 || id >= vocab_size()) {
      throw ContractError("adaptive cutoffs: id " + std::to_string(id) + " outside every cluster");
    }
    if (id < ends[0]) return -1;
    for (int j = 0; j + 1 < static_cast<int>(ends.size()); ++j) {
      if (id < ends[j + 1]) return j;
    }
    return tail_count() - 1;
  }
};

template <typename T>
struct FullSoftmaxHeadT {
  ParameterT<T> weight;  // [d x |V|]
  ParameterT<T> bias;    // [|V|]

  static FullSoftmaxHeadT init(int dim, int vocab, Rng& rng, bool weight_norm) {
    FullSoftmaxHeadT h;
    auto w0 = kaiming_tensor<T>(rng, {dim, vocab}, dim);
    h.weight = weight_norm ? ParameterT<T>::normed("head.w", std::move(w0))
                           : ParameterT<T>::plain("head.w", std::move(w0));
    h.bias = ParameterT<T>::plain("head.b", TensorT<T>::zeros({vocab}));
    return h;
  }

  int logprob(GraphT<T>& g, ParamBinder<T>& binder, int h, const std::vector<int>& targets) {
    const int logits = bias_add(g, matmul(g, h, binder.bind(weight)), binder.bind(bias));
    return row_log_prob(g, logits, targets);
  }

  void collect(std::vector<ParameterT<T>*>& out) {
    out.push_back(&weight);
    out.push_back(&bias);
  }
};

/// Two-level adaptive softmax: the head scores shortlist words plus one
/// synthetic id per tail cluster; a tail word's log-probability is
/// log p(cluster | h) + log p(word | cluster, P_j h) with a reduced
/// projection P_j per cluster.
template <typename T>
struct AdaptiveSoftmaxHeadT {
  AdaptiveCutoffs cutoffs;
  ParameterT<T> head_weight;  // [d x (shortlist + tails)]
  ParameterT<T> head_bias;
  struct Tail {
    ParameterT<T> proj;    // [d x d_k], no bias
    ParameterT<T> weight;  // [d_k x cluster size]
    ParameterT<T> bias;    // [cluster size]
  };
  std::vector<Tail> tails;

  static AdaptiveSoftmaxHeadT init(int dim, AdaptiveCutoffs cut, int proj_divisor, Rng& rng,
                                   bool weight_norm) {
    cut.validate();
    AdaptiveSoftmaxHeadT h;
    h.cutoffs = std::move(cut);
    const int head_width = h.cutoffs.shortlist() + h.cutoffs.tail_count();
    auto wrap = [&](std::string name, TensorT<T> t) {
      return weight_norm ? ParameterT<T>::normed(name, std::move(t)) : ParameterT<T>::plain(name, std::move(t));
    };
    h.head_weight = wrap("adahead.w", kaiming_tensor<T>(rng, {dim, head_width}, dim));
    h.head_bias = ParameterT<T>::plain("adahead.b", TensorT<T>::zeros({head_width}));
    const int dk = std::max(1, dim / proj_divisor);
    for (int j = 0; j < h.cutoffs.tail_count(); ++j) {
      const int size = h.cutoffs.ends[j + 1] - h.cutoffs.ends[j];
      Tail t;
      const std::string base = "adatail" + std::to_string(j);
      t.proj = wrap(base + ".proj", kaiming_tensor<T>(rng, {dim, dk}, dim));
      t.weight = wrap(base + ".w", kaiming_tensor<T>(rng, {dk, size}, dk));
      t.bias = ParameterT<T>::plain(base + ".b", TensorT<T>::zeros({size}));
      h.tails.push_back(std::move(t));
    }
    return h;
  }

  int logprob(GraphT<T>& g, ParamBinder<T>& binder, int h, const std::vector<int>& targets) {
    const int rows = g.value(h).dim(0);
    if (static_cast<int>(targets.size()) != rows) {
      throw DimensionError("adaptive softmax: " + std::to_string(targets.size()) + " targets for " +
                           shape_str(g.value(h).shape));
    }
    std::vector<int> mapped(targets.size());
    std::vector<std::vector<int>> routed(tails.size());
    const int shortlist = cutoffs.shortlist();
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const int cluster = cutoffs.cluster_of(targets[i]);
      if (cluster < 0) {
        mapped[i] = targets[i];
      } else {
        mapped[i] = shortlist + cluster;
        routed[cluster].push_back(static_cast<int>(i));
      }
    }
    const int head_logits = bias_add(g, matmul(g, h, binder.bind(head_weight)), binder.bind(head_bias));
    int lp = row_log_prob(g, head_logits, mapped);
    for (std::size_t j = 0; j < tails.size(); ++j) {
      if (routed[j].empty()) continue;
      const int sub = take_rows(g, h, routed[j]);
      const int reduced = matmul(g, sub, binder.bind(tails[j].proj));
      const int logits = bias_add(g, matmul(g, reduced, binder.bind(tails[j].weight)), binder.bind(tails[j].bias));
      std::vector<int> local;
      local.reserve(routed[j].size());
      for (int row : routed[j]) local.push_back(targets[row] - cutoffs.ends[j]);
      const int tail_lp = row_log_prob(g, logits, local);
      lp = add(g, lp, scatter_rows(g, tail_lp, routed[j], rows));
    }
    return lp;
  }

  void collect(std::vector<ParameterT<T>*>& out) {
    out.push_back(&head_weight);
    out.push_back(&head_bias);
    for (auto& t : tails) {
      out.push_back(&t.proj);
      out.push_back(&t.weight);
      out.push_back(&t.bias);
    }
  }
};

template <typename T>
using HeadT = std::variant<FullSoftmaxHeadT<T>, AdaptiveSoftmaxHeadT<T>>;

template <typename T>
int head_logprob(HeadT<T>& head, GraphT<T>& g, ParamBinder<T>& binder, int h,
                 const std::vector<int>& targets) {
  return std::visit([&](auto& concrete) { return concrete.logprob(g, binder, h, targets); }, head);
}

template <typename T>
void head_collect(HeadT<T>& head, std::vector<ParameterT<T>*>& out) {
  std::visit([&](auto& concrete) { concrete.collect(out); }, head);
}

inline double mask_count(const std::vector<float>& mask) {
  double c = 0;
  for (float m : mask) c += m;
  return c;
}

/// Summed masked negative log-likelihood: sum(-logprob * mask). The caller
/// divides by the unmasked count.
template <typename T>
int nll_masked(GraphT<T>& g, int logprobs, const TensorT<T>& mask) {
  const auto& lp = g.value(logprobs);
  check_same_shape(lp, mask, "nll");
  bool any = false;
  for (const T& m : mask.data) {
    if (m != T(0) && m != T(1)) throw ContractError("nll: mask entries must be 0 or 1");
    any = any || m == T(1);
  }
  if (!any) throw ContractError("nll: every position is masked");
  const int m = g.leaf(mask, "mask");
  return scale(g, sum(g, mul(g, logprobs, m)), -1.0);
}

}  // namespace glunet
