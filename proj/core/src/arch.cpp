#include "glunet/arch.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "glunet/tensor.hpp"

namespace glunet {

bool gate_has_second_path(GateKind k) {
  return k == GateKind::GLU || k == GateKind::GTU || k == GateKind::Bilinear;
}

const char* to_string(GateKind k) {
  switch (k) {
    case GateKind::GLU: return "glu";
    case GateKind::GTU: return "gtu";
    case GateKind::ReLU: return "relu";
    case GateKind::Tanh: return "tanh";
    case GateKind::Linear: return "linear";
    case GateKind::Bilinear: return "bilinear";
  }
  return "?";
}

GateKind gate_from_string(const std::string& s) {
  if (s == "glu") return GateKind::GLU;
  if (s == "gtu") return GateKind::GTU;
  if (s == "relu") return GateKind::ReLU;
  if (s == "tanh") return GateKind::Tanh;
  if (s == "linear") return GateKind::Linear;
  if (s == "bilinear") return GateKind::Bilinear;
  throw ConfigError("unknown gate kind '" + s + "' (want glu|gtu|relu|tanh|linear|bilinear)");
}

void BlockSpec::validate() const {
  if (taps.empty()) throw ConfigError("block: no layers");
  if (taps.size() > 5) throw ConfigError("block: " + std::to_string(taps.size()) + " layers, at most 5 allowed");
  for (const auto& t : taps) {
    if (t.k < 1) throw ConfigError("block: kernel width " + std::to_string(t.k) + " must be >= 1");
    if (t.n < 1) throw ConfigError("block: unit count " + std::to_string(t.n) + " must be >= 1");
  }
  if (repeat < 1) throw ConfigError("block: repeat " + std::to_string(repeat) + " must be >= 1");
  if (bottleneck) {
    if (taps.size() < 3) throw ConfigError("bottleneck block: needs at least 3 layers");
    if (taps.front().k != 1 || taps.back().k != 1) {
      throw ConfigError("bottleneck block: first and last layer must have k=1");
    }
    int wide = 0;
    for (std::size_t i = 0; i < taps.size(); ++i) {
      if (taps[i].k > 1) {
        ++wide;
        if (i == 0 || i + 1 == taps.size()) throw ConfigError("bottleneck block: k>1 layer must be interior");
      }
    }
    if (wide > 1) throw ConfigError("bottleneck block: at most one k>1 layer");
  }
}

void ArchSpec::validate() const {
  if (embed_dim < 1) throw ConfigError("embed must be >= 1");
  for (const auto& b : blocks) b.validate();
  for (std::size_t i = 0; i < cutoffs.size(); ++i) {
    if (cutoffs[i] < 1) throw ConfigError("cutoffs must be positive");
    if (i > 0 && cutoffs[i] <= cutoffs[i - 1]) throw ConfigError("cutoffs must be strictly increasing");
  }
  if (context_window && *context_window < 1) throw ConfigError("context_window must be >= 1");
  if (tail_proj_divisor < 1) throw ConfigError("tail projection divisor must be >= 1");
}

int ArchSpec::receptive_field() const {
  int rf = 1;
  for (const auto& b : blocks) {
    int per_block = 0;
    for (const auto& t : b.taps) per_block += t.k - 1;
    rf += b.repeat * per_block;
  }
  return rf;
}

int ArchSpec::output_dim() const {
  if (blocks.empty()) return embed_dim;
  return blocks.back().taps.back().n;
}

std::int64_t ArchSpec::conv_layer_count() const {
  std::int64_t c = 0;
  for (const auto& b : blocks) c += static_cast<std::int64_t>(b.repeat) * static_cast<std::int64_t>(b.taps.size());
  return c;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

class Cursor {
 public:
  Cursor(const std::string& text, int line) : text_(text), line_(line) {}

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }

  int integer() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start) fail("expected an integer");
    return std::stoi(text_.substr(start, pos_ - start));
  }

  bool done() {
    skip_ws();
    return pos_ >= text_.size();
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("arch config line " + std::to_string(line_) + ": " + what + " in '" + text_ + "'");
  }

 private:
  const std::string& text_;
  int line_;
  std::size_t pos_ = 0;
};

BlockSpec parse_block(const std::string& value, int line) {
  Cursor c(value, line);
  BlockSpec block;
  if (c.eat('B')) block.bottleneck = true;
  c.expect('[');
  while (true) {
    ConvTap tap;
    tap.k = c.integer();
    c.expect(',');
    tap.n = c.integer();
    block.taps.push_back(tap);
    if (c.eat(';')) continue;
    break;
  }
  c.expect(']');
  c.expect('x');
  block.repeat = c.integer();
  if (!c.done()) c.fail("trailing characters after block spec");
  return block;
}

std::vector<int> parse_int_list(const std::string& value, int line) {
  std::vector<int> out;
  Cursor c(value, line);
  out.push_back(c.integer());
  while (c.eat(',')) out.push_back(c.integer());
  if (!c.done()) c.fail("trailing characters after integer list");
  return out;
}

}  // namespace

ArchSpec parse_arch(const std::string& text) {
  ArchSpec spec;
  bool saw_embed = false, saw_gate = false, saw_cutoffs = false, saw_window = false;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    if (auto hash = s.find('#'); hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("arch config line " + std::to_string(line) + ": expected key=value, got '" + s + "'");
    }
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    try {
      if (key == "embed") {
        if (saw_embed) throw ConfigError("duplicate key 'embed'");
        Cursor c(value, line);
        spec.embed_dim = c.integer();
        if (!c.done()) c.fail("trailing characters");
        saw_embed = true;
      } else if (key == "conv") {
        spec.blocks.push_back(parse_block(value, line));
      } else if (key == "gate") {
        if (saw_gate) throw ConfigError("duplicate key 'gate'");
        spec.gate = gate_from_string(value);
        saw_gate = true;
      } else if (key == "cutoffs") {
        if (saw_cutoffs) throw ConfigError("duplicate key 'cutoffs'");
        spec.cutoffs = parse_int_list(value, line);
        saw_cutoffs = true;
      } else if (key == "context_window") {
        if (saw_window) throw ConfigError("duplicate key 'context_window'");
        spec.context_window = parse_int_list(value, line).at(0);
        saw_window = true;
      } else {
        throw ConfigError("unknown key '" + key + "'");
      }
    } catch (const ConfigError& e) {
      std::string msg = e.what();
      if (msg.rfind("arch config line", 0) == 0) throw;
      throw ConfigError("arch config line " + std::to_string(line) + ": " + msg);
    }
  }
  if (!saw_embed) throw ConfigError("arch config: missing 'embed'");
  spec.validate();
  return spec;
}

std::string render_arch(const ArchSpec& spec) {
  std::ostringstream os;
  os << "embed=" << spec.embed_dim << "\n";
  for (const auto& b : spec.blocks) {
    os << "conv=" << (b.bottleneck ? "B" : "") << "[";
    for (std::size_t i = 0; i < b.taps.size(); ++i) {
      if (i) os << ";";
      os << b.taps[i].k << "," << b.taps[i].n;
    }
    os << "]x" << b.repeat << "\n";
  }
  os << "gate=" << to_string(spec.gate) << "\n";
  if (!spec.cutoffs.empty()) {
    os << "cutoffs=";
    for (std::size_t i = 0; i < spec.cutoffs.size(); ++i) {
      if (i) os << ",";
      os << spec.cutoffs[i];
    }
    os << "\n";
  }
  if (spec.context_window) os << "context_window=" << *spec.context_window << "\n";
  return os.str();
}

std::vector<int> effective_cutoffs(const std::vector<int>& cutoffs, int vocab_size) {
  if (vocab_size < 1) throw ContractError("effective_cutoffs: empty vocabulary");
  std::set<int> ends;
  for (int c : cutoffs) {
    if (c < vocab_size) ends.insert(c);
  }
  ends.insert(vocab_size);
  return {ends.begin(), ends.end()};
}

std::int64_t count_params(const ArchSpec& spec, int vocab_size) {
  spec.validate();
  const bool gated = gate_has_second_path(spec.gate);
  std::int64_t total = static_cast<std::int64_t>(vocab_size) * spec.embed_dim;
  int in = spec.embed_dim;
  for (const auto& b : spec.blocks) {
    for (int r = 0; r < b.repeat; ++r) {
      const int block_in = in;
      for (const auto& t : b.taps) {
        const std::int64_t path = static_cast<std::int64_t>(t.k) * in * t.n + t.n;
        total += gated ? 2 * path : path;
        in = t.n;
      }
      if (block_in != in) total += static_cast<std::int64_t>(block_in) * in;  // skip projection
    }
  }
  const int d = in;
  if (spec.cutoffs.empty()) {
    total += static_cast<std::int64_t>(d) * vocab_size + vocab_size;
    return total;
  }
  const auto ends = effective_cutoffs(spec.cutoffs, vocab_size);
  const int shortlist = ends[0];
  const int tails = static_cast<int>(ends.size()) - 1;
  total += static_cast<std::int64_t>(d) * (shortlist + tails) + (shortlist + tails);
  const int dk = std::max(1, d / spec.tail_proj_divisor);
  for (int t = 0; t < tails; ++t) {
    const int size = ends[t + 1] - ends[t];
    total += static_cast<std::int64_t>(d) * dk + static_cast<std::int64_t>(dk) * size + size;
  }
  return total;
}

}  // namespace glunet
