#pragma once

#include <string>

#include "glunet/model.hpp"
#include "glunet/vocab.hpp"

namespace glunet {

/// Versioned little-endian binary container: arch config text, vocabulary
/// (plus its hash), weight-norm flag, and every parameter tensor with its
/// shape. Round trips are bit-exact.
struct Checkpoint {
  ModelF model;
  Vocabulary vocab;
};

void save_checkpoint(const std::string& path, ModelF& model, const Vocabulary& vocab);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace glunet
