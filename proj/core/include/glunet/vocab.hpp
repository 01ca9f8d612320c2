#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace glunet {

/// Bidirectional token<->id table with frequency counts. Ids 0..2 are
/// reserved for <unk>, <s>, </s>; ids from 3 up are assigned in descending
/// frequency with ties broken by first occurrence, which is what the
/// adaptive softmax's cluster-by-id-range layout relies on.
class Vocabulary {
 public:
  Vocabulary() = default;  // empty; fill via build/load

  static constexpr int kUnk = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;

  static const std::string& unk_token();
  static const std::string& bos_token();
  static const std::string& eos_token();

  /// Tokens with fewer than min_count occurrences map to <unk>.
  static Vocabulary build(const std::vector<std::string>& tokens, int min_count);

  int id(const std::string& token) const;  // kUnk when absent
  const std::string& token(int id) const;
  std::int64_t count(int id) const;
  int size() const { return static_cast<int>(tokens_.size()); }

  /// FNV-1a over every token string and count, in id order.
  std::uint64_t hash() const;

  /// One `token \t count` line per id, frequency-descending after the
  /// reserved rows.
  void save(const std::string& path) const;
  std::string to_text() const;
  static Vocabulary load(const std::string& path);
  static Vocabulary from_text(const std::string& text);

 private:
  void push(const std::string& token, std::int64_t count);

  std::vector<std::string> tokens_;
  std::vector<std::int64_t> counts_;
  std::unordered_map<std::string, int> ids_;
};

}  // namespace glunet
