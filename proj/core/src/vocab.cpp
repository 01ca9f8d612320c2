#include "glunet/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "glunet/tensor.hpp"

namespace glunet {

const std::string& Vocabulary::unk_token() {
  static const std::string s = "<unk>";
  return s;
}
const std::string& Vocabulary::bos_token() {
  static const std::string s = "<s>";
  return s;
}
const std::string& Vocabulary::eos_token() {
  static const std::string s = "</s>";
  return s;
}

void Vocabulary::push(const std::string& token, std::int64_t count) {
  ids_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(token);
  counts_.push_back(count);
}

Vocabulary Vocabulary::build(const std::vector<std::string>& tokens, int min_count) {
  if (tokens.empty()) throw ContractError("vocabulary: empty corpus");
  if (min_count < 1) throw ContractError("vocabulary: min_count must be >= 1");

  struct Entry {
    std::string token;
    std::int64_t count = 0;
    std::size_t first_seen = 0;
  };
  std::unordered_map<std::string, std::size_t> index;
  std::vector<Entry> entries;
  std::int64_t reserved_counts[3] = {0, 0, 0};
  for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
    const std::string& t = tokens[pos];
    if (t == unk_token()) {
      ++reserved_counts[kUnk];
      continue;
    }
    if (t == bos_token()) {
      ++reserved_counts[kBos];
      continue;
    }
    if (t == eos_token()) {
      ++reserved_counts[kEos];
      continue;
    }
    auto [it, fresh] = index.emplace(t, entries.size());
    if (fresh) entries.push_back({t, 1, pos});
    else ++entries[it->second].count;
  }

  std::vector<const Entry*> kept;
  for (const auto& e : entries) {
    if (e.count >= min_count) kept.push_back(&e);
    else reserved_counts[kUnk] += e.count;  // below threshold -> counted as <unk>
  }
  std::sort(kept.begin(), kept.end(), [](const Entry* a, const Entry* b) {
    if (a->count != b->count) return a->count > b->count;
    return a->first_seen < b->first_seen;
  });

  Vocabulary v;
  v.push(unk_token(), reserved_counts[kUnk]);
  v.push(bos_token(), reserved_counts[kBos]);
  v.push(eos_token(), reserved_counts[kEos]);
  for (const Entry* e : kept) v.push(e->token, e->count);
  return v;
}

int Vocabulary::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) {
    throw ContractError("vocabulary: id " + std::to_string(id) + " out of range [0," +
                        std::to_string(size()) + ")");
  }
  return tokens_[id];
}

std::int64_t Vocabulary::count(int id) const {
  if (id < 0 || id >= size()) {
    throw ContractError("vocabulary: id " + std::to_string(id) + " out of range [0," +
                        std::to_string(size()) + ")");
  }
  return counts_[id];
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](unsigned char byte) {
    h ^= byte;
    h *= 1099511628211ull;
  };
  for (int i = 0; i < size(); ++i) {
    for (unsigned char ch : tokens_[i]) mix(ch);
    mix(0);
    std::uint64_t c = static_cast<std::uint64_t>(counts_[i]);
    for (int b = 0; b < 8; ++b) mix(static_cast<unsigned char>((c >> (8 * b)) & 0xff));
  }
  return h;
}

std::string Vocabulary::to_text() const {
  std::ostringstream os;
  for (int i = 0; i < size(); ++i) os << tokens_[i] << '\t' << counts_[i] << '\n';
  return os.str();
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("vocabulary: cannot write " + path);
  out << to_text();
}

Vocabulary Vocabulary::from_text(const std::string& text) {
  Vocabulary v;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error("vocabulary line " + std::to_string(lineno) + ": expected token\\tcount");
    }
    v.push(line.substr(0, tab), std::stoll(line.substr(tab + 1)));
  }
  if (v.size() < 3 || v.tokens_[kUnk] != unk_token() || v.tokens_[kBos] != bos_token() ||
      v.tokens_[kEos] != eos_token()) {
    throw std::runtime_error("vocabulary: reserved rows <unk>, <s>, </s> must come first");
  }
  return v;
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("vocabulary: cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

}  // namespace glunet
