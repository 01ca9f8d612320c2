#include "glunet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace glunet {

namespace {

constexpr char kMagic[8] = {'G', 'L', 'U', 'N', 'C', 'K', 'P', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void put_tensor(std::ostream& out, const TensorF& t) {
  out.put(static_cast<char>(t.ndim()));
  for (int d : t.shape) put_u32(out, static_cast<std::uint32_t>(d));
  for (float x : t.data) put_u32(out, std::bit_cast<std::uint32_t>(x));
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint64_t get_u64(std::istream& in) {
  std::uint64_t lo = get_u32(in);
  std::uint64_t hi = get_u32(in);
  return lo | (hi << 32);
}

std::string get_string(std::istream& in) {
  const std::uint32_t len = get_u32(in);
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw std::runtime_error("checkpoint: truncated string");
  return s;
}

TensorF get_tensor(std::istream& in) {
  const int ndim = in.get();
  if (ndim <= 0 || ndim > 4) throw std::runtime_error("checkpoint: bad tensor rank");
  std::vector<int> shape(ndim);
  for (int& d : shape) d = static_cast<int>(get_u32(in));
  TensorF t(shape);
  for (float& x : t.data) x = std::bit_cast<float>(get_u32(in));
  return t;
}

}  // namespace

void save_checkpoint(const std::string& path, ModelF& model, const Vocabulary& vocab) {
  if (vocab.size() != model.vocab) {
    throw ContractError("checkpoint: vocabulary size " + std::to_string(vocab.size()) +
                        " does not match model (" + std::to_string(model.vocab) + ")");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  out.write(kMagic, 8);
  put_u32(out, kVersion);
  put_u64(out, vocab.hash());
  out.put(model.weight_norm ? 1 : 0);
  put_string(out, render_arch(model.arch));
  put_string(out, vocab.to_text());
  const auto params = model.parameters();
  put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (auto* p : params) {
    put_string(out, p->name);
    out.put(p->weight_normed ? 1 : 0);
    put_tensor(out, p->v);
    if (p->weight_normed) put_tensor(out, p->g);
  }
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot read " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) throw std::runtime_error("checkpoint: bad magic in " + path);
  const std::uint32_t version = get_u32(in);
  if (version != kVersion) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  }
  const std::uint64_t stored_hash = get_u64(in);
  const bool weight_norm = in.get() != 0;
  const std::string arch_text = get_string(in);
  const std::string vocab_text = get_string(in);

  Checkpoint ck;
  ck.vocab = Vocabulary::from_text(vocab_text);
  if (ck.vocab.hash() != stored_hash) {
    throw std::runtime_error("checkpoint: vocabulary hash mismatch (corrupt file?)");
  }
  Rng rng(0);  // layout only; every tensor is overwritten below
  ck.model = ModelF(parse_arch(arch_text), ck.vocab.size(), rng, weight_norm);

  const std::uint32_t n = get_u32(in);
  auto params = ck.model.parameters();
  if (n != params.size()) {
    throw std::runtime_error("checkpoint: parameter count mismatch (" + std::to_string(n) + " vs " +
                             std::to_string(params.size()) + ")");
  }
  for (auto* p : params) {
    const std::string name = get_string(in);
    if (name != p->name) throw std::runtime_error("checkpoint: expected parameter " + p->name + ", found " + name);
    const bool normed = in.get() != 0;
    if (normed != p->weight_normed) throw std::runtime_error("checkpoint: weight-norm flag mismatch for " + name);
    TensorF v = get_tensor(in);
    if (v.shape != p->v.shape) throw std::runtime_error("checkpoint: shape mismatch for " + name);
    p->v = std::move(v);
    if (normed) {
      TensorF gt = get_tensor(in);
      if (gt.shape != p->g.shape) throw std::runtime_error("checkpoint: scale shape mismatch for " + name);
      p->g = std::move(gt);
    }
  }
  return ck;
}

}  // namespace glunet
