#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace glunet {

/// Deterministic synthetic text: an order-3 Markov word stream with planted
/// marker dependencies. Each sentence carries an open marker qa<x> whose
/// matching close qb<x> appears a fixed distance later (one short-span and
/// one long-span pair per sentence), with a cue token directly before every
/// close. The close's identity is only predictable from the open marker, so
/// a model must see at least `short_span` (resp. `long_span`) tokens back to
/// resolve it. Marker tokens are invisible to the Markov chain, so nothing
/// else leaks their identity.
struct CorpusOptions {
  std::uint64_t seed = 1;
  std::size_t min_bytes = 250 * 1024;
  int word_types = 96;
  int marker_kinds = 8;
  int short_span = 6;
  int long_span = 18;
  int sentence_words = 26;  // non-marker words per sentence
  int sentences_per_paragraph = 4;
  bool plant_markers = true;
};

std::string generate_corpus(const CorpusOptions& opts);

}  // namespace glunet
