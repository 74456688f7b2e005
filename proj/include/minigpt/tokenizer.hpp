#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace minigpt {

using TokenId = std::int32_t;
using TokenIds = std::vector<TokenId>;

/// Decodes UTF-8 into Unicode scalar values. Throws std::invalid_argument on
/// malformed input, naming the byte offset.
std::u32string utf8_decode(std::string_view text);
std::string utf8_encode(std::u32string_view text);

/// Character-level vocabulary: one id per distinct Unicode scalar, assigned
/// in ascending code-point order.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Builds the vocabulary of `text` (UTF-8). Throws on empty text.
  static Vocabulary build(std::string_view text);
  /// Rebuilds from the concatenated sorted characters (as stored in
  /// checkpoints and the JSON export).
  static Vocabulary from_chars(std::string_view chars_utf8);

  std::size_t size() const noexcept { return chars_.size(); }
  const std::u32string& chars() const noexcept { return chars_; }
  std::string chars_utf8() const { return utf8_encode(chars_); }

  bool contains(char32_t c) const { return ids_.contains(c); }
  TokenId id_of(char32_t c) const;
  char32_t char_of(TokenId id) const;

  TokenIds encode(std::string_view text) const;
  std::string decode(const TokenIds& ids) const;

  /// {"chars": "<concatenated sorted chars>"}
  std::string to_json() const;
  static Vocabulary from_json(std::string_view json);

  bool operator==(const Vocabulary& other) const { return chars_ == other.chars_; }

 private:
  explicit Vocabulary(std::u32string sorted_unique);

  std::u32string chars_;
  std::unordered_map<char32_t, TokenId> ids_;
};

}  // namespace minigpt
