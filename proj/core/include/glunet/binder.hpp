#pragma once

#include <unordered_map>
#include <utility>
#include <vector>

#include "glunet/graph.hpp"
#include "glunet/param.hpp"

namespace glunet {

/// Feeds materialized parameter values into a graph as leaves and, after
/// backward(), routes each leaf gradient back into its parameter (applying
/// the weight-norm chain rule where needed). A parameter bound twice on the
/// same graph reuses its leaf, so gradients from every use accumulate there.
template <typename T>
class ParamBinder {
 public:
  explicit ParamBinder(GraphT<T>& g) : graph_(&g) {}

  int bind(ParameterT<T>& p) {
    if (auto it = ids_.find(&p); it != ids_.end()) return it->second;
    const int id = graph_->leaf(p.materialize(), p.name);
    ids_.emplace(&p, id);
    bound_.emplace_back(&p, id);
    return id;
  }

  void pull_grads() {
    for (auto& [param, id] : bound_) {
      if (graph_->has_grad(id)) param->add_weight_grad(graph_->grad(id));
    }
  }

 private:
  GraphT<T>* graph_;
  std::unordered_map<ParameterT<T>*, int> ids_;
  std::vector<std::pair<ParameterT<T>*, int>> bound_;
};

}  // namespace glunet
