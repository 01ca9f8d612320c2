#include "glunet/batching.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "glunet/tensor.hpp"

namespace glunet {

SequenceMode sequence_mode_from_string(const std::string& s) {
  if (s == "sentence") return SequenceMode::Sentence;
  if (s == "paragraph") return SequenceMode::Paragraph;
  throw ContractError("unknown sequence mode '" + s + "' (want sentence|paragraph)");
}

const char* to_string(SequenceMode m) {
  return m == SequenceMode::Sentence ? "sentence" : "paragraph";
}

double Batch::unmasked() const {
  double c = 0;
  for (float m : mask) c += m;
  return c;
}

std::vector<std::string> tokenize_whitespace(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

namespace {

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

std::vector<int> encode_unit(const std::string& unit, const Vocabulary& vocab) {
  std::vector<int> ids;
  ids.push_back(Vocabulary::kBos);
  for (const auto& tok : tokenize_whitespace(unit)) ids.push_back(vocab.id(tok));
  ids.push_back(Vocabulary::kEos);
  return ids;
}

}  // namespace

std::vector<std::vector<int>> encode_lines(const std::string& text, const Vocabulary& vocab,
                                           SequenceMode mode) {
  std::vector<std::vector<int>> out;
  std::istringstream in(text);
  std::string line;
  std::string paragraph;
  auto flush_paragraph = [&]() {
    if (!blank(paragraph)) out.push_back(encode_unit(paragraph, vocab));
    paragraph.clear();
  };
  while (std::getline(in, line)) {
    if (mode == SequenceMode::Sentence) {
      if (!blank(line)) out.push_back(encode_unit(line, vocab));
    } else {
      if (blank(line)) {
        flush_paragraph();
      } else {
        paragraph += line;
        paragraph += ' ';
      }
    }
  }
  if (mode == SequenceMode::Paragraph) flush_paragraph();
  return out;
}

std::vector<std::string> decode(const std::vector<int>& ids, const Vocabulary& vocab) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(vocab.token(id));
  return out;
}

std::vector<Batch> batch_sentences(const std::vector<std::vector<int>>& seqs, int batch_size,
                                   std::uint64_t seed) {
  if (batch_size < 1) throw ContractError("batch_sentences: batch size must be >= 1");
  std::vector<std::size_t> order(seqs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return seqs[a].size() < seqs[b].size(); });

  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < order.size(); i += batch_size) {
    groups.emplace_back(order.begin() + i,
                        order.begin() + std::min(order.size(), i + static_cast<std::size_t>(batch_size)));
  }
  std::mt19937_64 rng(seed);
  std::shuffle(groups.begin(), groups.end(), rng);

  std::vector<Batch> out;
  for (const auto& group : groups) {
    int cols = 0;
    for (std::size_t s : group) cols = std::max(cols, static_cast<int>(seqs[s].size()) - 1);
    if (cols <= 0) continue;  // degenerate one-token sequences have nothing to predict
    Batch b;
    b.rows = static_cast<int>(group.size());
    b.cols = cols;
    b.inputs.assign(static_cast<std::size_t>(b.rows) * cols, 0);
    b.targets.assign(static_cast<std::size_t>(b.rows) * cols, 0);
    b.mask.assign(static_cast<std::size_t>(b.rows) * cols, 0.0f);
    b.input_valid.assign(static_cast<std::size_t>(b.rows) * cols, 1);
    for (int r = 0; r < b.rows; ++r) {
      const auto& seq = seqs[group[r]];
      for (int t = 0; t + 1 < static_cast<int>(seq.size()); ++t) {
        b.inputs[static_cast<std::size_t>(r) * cols + t] = seq[t];
        b.targets[static_cast<std::size_t>(r) * cols + t] = seq[t + 1];
        // A row is a single sentence, so <s> never appears as a target.
        b.mask[static_cast<std::size_t>(r) * cols + t] = 1.0f;
      }
    }
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<int> concat_stream(const std::vector<std::vector<int>>& seqs) {
  std::vector<int> stream;
  for (const auto& s : seqs) stream.insert(stream.end(), s.begin(), s.end());
  return stream;
}

std::vector<Batch> batch_contiguous(const std::vector<std::vector<int>>& seqs, int lanes, int unroll,
                                    int carry) {
  if (lanes < 1) throw ContractError("batch_contiguous: lanes must be >= 1");
  if (unroll < 2) throw ContractError("batch_contiguous: unroll length must be >= 2");
  if (carry < 0) throw ContractError("batch_contiguous: carry must be >= 0");
  const std::vector<int> stream = concat_stream(seqs);
  const long total = static_cast<long>(stream.size());
  // Round up so the lanes jointly cover every target exactly once; the last
  // lane's overhang past the stream end is invalid and masked.
  const long lane_len = (total + lanes - 1) / lanes;
  if (lane_len < 2) throw ContractError("batch_contiguous: stream too short for " + std::to_string(lanes) + " lanes");

  std::vector<Batch> out;
  for (long start = 0; start < lane_len; start += unroll) {
    const int fresh = static_cast<int>(std::min<long>(unroll, lane_len - start));
    Batch b;
    b.rows = lanes;
    b.cols = carry + fresh;
    b.carry_cols = carry;
    b.inputs.assign(static_cast<std::size_t>(b.rows) * b.cols, 0);
    b.targets.assign(static_cast<std::size_t>(b.rows) * b.cols, 0);
    b.mask.assign(static_cast<std::size_t>(b.rows) * b.cols, 0.0f);
    b.input_valid.assign(static_cast<std::size_t>(b.rows) * b.cols, 0);
    for (int lane = 0; lane < lanes; ++lane) {
      const long lane_base = static_cast<long>(lane) * lane_len;
      for (int t = 0; t < b.cols; ++t) {
        const long src = lane_base + start - carry + t;
        const std::size_t cell = static_cast<std::size_t>(lane) * b.cols + t;
        if (src >= 0 && src < total) {
          b.inputs[cell] = stream[src];
          b.input_valid[cell] = 1;
        }
        const long tgt = src + 1;
        // Carry positions were already predicted by the previous batch; the
        // last lane's final target may fall off the stream.
        const bool fresh_pos = t >= carry;
        if (fresh_pos && tgt >= 1 && tgt < total && stream[tgt] != Vocabulary::kBos) {
          b.targets[cell] = stream[tgt];
          b.mask[cell] = 1.0f;
        } else if (tgt >= 1 && tgt < total) {
          b.targets[cell] = stream[tgt];  // keep alignment, loss masked
        }
      }
    }
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace glunet
