#include "glunet/corpus.hpp"

#include <random>
#include <sstream>
#include <vector>

#include "glunet/tensor.hpp"

namespace glunet {

namespace {

std::uint64_t mix_hash(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

std::string generate_corpus(const CorpusOptions& opts) {
  if (opts.word_types < 8) throw ContractError("corpus: need at least 8 word types");
  if (opts.marker_kinds < 2) throw ContractError("corpus: need at least 2 marker kinds");
  if (opts.short_span < 2 || opts.long_span <= opts.short_span) {
    throw ContractError("corpus: want 2 <= short_span < long_span");
  }
  if (opts.plant_markers && opts.sentence_words < opts.long_span + 4) {
    throw ContractError("corpus: sentences too short for the long span");
  }

  std::mt19937_64 rng(opts.seed);
  const std::uint64_t language_salt = rng();

  std::vector<std::string> words(opts.word_types);
  for (int i = 0; i < opts.word_types; ++i) {
    std::ostringstream os;
    os << 'w' << (i < 10 ? "0" : "") << i;
    words[i] = os.str();
  }

  // Zipf-ish unigram fallback distribution.
  std::vector<double> weights(opts.word_types);
  for (int i = 0; i < opts.word_types; ++i) weights[i] = 1.0 / (i + 2.0);
  std::discrete_distribution<int> unigram(weights.begin(), weights.end());
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  int h1 = 0, h2 = 1, h3 = 2;  // markers never enter this state
  auto next_word = [&]() {
    int w;
    if (coin(rng) < 0.12) {
      w = unigram(rng);
    } else {
      const std::uint64_t key = mix_hash(language_salt ^ (static_cast<std::uint64_t>(h1) * 1000003ull +
                                                          static_cast<std::uint64_t>(h2) * 1009ull + h3));
      const int pick = static_cast<int>(rng() % 4);
      w = static_cast<int>(mix_hash(key + pick) % static_cast<std::uint64_t>(opts.word_types));
    }
    h1 = h2;
    h2 = h3;
    h3 = w;
    return w;
  };

  std::ostringstream out;
  std::size_t bytes = 0;
  int sentence_in_paragraph = 0;
  while (bytes < opts.min_bytes) {
    const int length = opts.sentence_words + (opts.plant_markers ? 6 : 0);
    std::vector<std::string> slots(length);

    int qa_long = -1, qa_short = -1, qb_long = -1, qb_short = -1, cue_long = -1, cue_short = -1;
    if (opts.plant_markers) {
      const int jitter = static_cast<int>(rng() % 3);
      qa_long = 1 + jitter;
      qb_long = qa_long + opts.long_span;
      cue_long = qb_long - 1;
      qa_short = qa_long + 3;
      qb_short = qa_short + opts.short_span;
      cue_short = qb_short - 1;
      const int xl = static_cast<int>(rng() % opts.marker_kinds);
      const int xs = static_cast<int>(rng() % opts.marker_kinds);
      slots[qa_long] = "qa" + std::to_string(xl);
      slots[qb_long] = "qb" + std::to_string(xl);
      slots[cue_long] = "cueL";
      slots[qa_short] = "qa" + std::to_string(xs);
      slots[qb_short] = "qb" + std::to_string(xs);
      slots[cue_short] = "cueS";
    }
    for (int i = 0; i < length; ++i) {
      if (slots[i].empty()) slots[i] = words[next_word()];
    }

    std::ostringstream line;
    for (int i = 0; i < length; ++i) {
      if (i) line << ' ';
      line << slots[i];
    }
    line << '\n';
    const std::string s = line.str();
    out << s;
    bytes += s.size();
    if (++sentence_in_paragraph == opts.sentences_per_paragraph) {
      out << '\n';
      ++bytes;
      sentence_in_paragraph = 0;
    }
  }
  return out.str();
}

}  // namespace glunet
