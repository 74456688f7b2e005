#include "minigpt/tokenizer.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "json.hpp"

namespace minigpt {
namespace {

std::string describe(char32_t c) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "U+%04X", static_cast<unsigned>(c));
  std::string printable = c >= 0x20 && c < 0x7f ? "'" + std::string(1, static_cast<char>(c)) + "' " : "";
  return printable + "(" + buf + ")";
}

}  // namespace

std::u32string utf8_decode(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (lead < 0x80) {
      len = 1;
      cp = lead;
    } else if ((lead & 0xE0) == 0xC0) {
      len = 2;
      cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
      len = 3;
      cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
      len = 4;
      cp = lead & 0x07;
    } else {
      throw std::invalid_argument("invalid UTF-8 lead byte at offset " + std::to_string(i));
    }
    if (i + len > text.size()) throw std::invalid_argument("truncated UTF-8 sequence at offset " + std::to_string(i));
    for (std::size_t k = 1; k < len; ++k) {
      const auto cont = static_cast<unsigned char>(text[i + k]);
      if ((cont & 0xC0) != 0x80)
        throw std::invalid_argument("invalid UTF-8 continuation byte at offset " + std::to_string(i + k));
      cp = (cp << 6) | (cont & 0x3F);
    }
    const bool overlong = (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000);
    if (overlong || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
      throw std::invalid_argument("invalid UTF-8 scalar at offset " + std::to_string(i));
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string utf8_encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t c : text) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (c >> 18)));
      out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

Vocabulary::Vocabulary(std::u32string sorted_unique) : chars_(std::move(sorted_unique)) {
  ids_.reserve(chars_.size());
  for (std::size_t i = 0; i < chars_.size(); ++i) ids_.emplace(chars_[i], static_cast<TokenId>(i));
}

Vocabulary Vocabulary::build(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("cannot build a vocabulary from empty text");
  std::u32string chars = utf8_decode(text);
  std::sort(chars.begin(), chars.end());
  chars.erase(std::unique(chars.begin(), chars.end()), chars.end());
  return Vocabulary(std::move(chars));
}

Vocabulary Vocabulary::from_chars(std::string_view chars_utf8) {
  std::u32string chars = utf8_decode(chars_utf8);
  if (chars.empty()) throw std::invalid_argument("vocabulary character list is empty");
  if (!std::is_sorted(chars.begin(), chars.end()) || std::adjacent_find(chars.begin(), chars.end()) != chars.end())
    throw std::invalid_argument("vocabulary characters must be unique and sorted by code point");
  return Vocabulary(std::move(chars));
}

TokenId Vocabulary::id_of(char32_t c) const {
  auto it = ids_.find(c);
  if (it == ids_.end()) throw std::out_of_range("unknown character " + describe(c));
  return it->second;
}

char32_t Vocabulary::char_of(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= chars_.size())
    throw std::out_of_range("token id " + std::to_string(id) + " outside [0, " + std::to_string(chars_.size()) + ")");
  return chars_[static_cast<std::size_t>(id)];
}

TokenIds Vocabulary::encode(std::string_view text) const {
  const std::u32string chars = utf8_decode(text);
  TokenIds ids;
  ids.reserve(chars.size());
  for (std::size_t i = 0; i < chars.size(); ++i) {
    auto it = ids_.find(chars[i]);
    if (it == ids_.end())
      throw std::out_of_range("unknown character " + describe(chars[i]) + " at position " + std::to_string(i));
    ids.push_back(it->second);
  }
  return ids;
}

std::string Vocabulary::decode(const TokenIds& ids) const {
  std::u32string chars;
  chars.reserve(ids.size());
  for (TokenId id : ids) chars.push_back(char_of(id));
  return utf8_encode(chars);
}

std::string Vocabulary::to_json() const { return nlohmann::json{{"chars", chars_utf8()}}.dump(); }

Vocabulary Vocabulary::from_json(std::string_view json) {
  const auto doc = nlohmann::json::parse(json);
  return from_chars(doc.at("chars").get<std::string>());
}

}  // namespace minigpt
