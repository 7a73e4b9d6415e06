/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#ifndef STFILTER_TOKENIZER_HPP
#define STFILTER_TOKENIZER_HPP

#include <cstddef>
#include <string_view>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

namespace stfilter {

enum class TokenizerMode { Whitespace, Char };

// Text is always NFC-normalized before counting.
struct TokenizerConfig {
  TokenizerMode mode = TokenizerMode::Whitespace;
};

namespace detail {

inline bool is_ascii(std::string_view text) {
  for (unsigned char c : text)
    if (c >= 0x80) return false;
  return true;
}

inline bool ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f' || c == '\r';
}

template <typename IsSpace, typename Range>
std::size_t count_units(const Range& units, TokenizerMode mode, IsSpace is_space) {
  std::size_t count = 0;
  bool in_token = false;
  for (auto u : units) {
    bool space = is_space(u);
    if (mode == TokenizerMode::Char) {
      count += !space;
    } else {
      if (!space && !in_token) ++count;
      in_token = !space;
    }
  }
  return count;
}

}  // namespace detail

inline std::size_t token_count(std::string_view text, const TokenizerConfig& cfg = {}) {
  if (text.empty()) return 0;
  // ASCII is invariant under NFC and every byte is a scalar value.
  if (detail::is_ascii(text)) {
    return detail::count_units(text, cfg.mode,
                               [](char c) { return detail::ascii_space(static_cast<unsigned char>(c)); });
  }

  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  icu::UnicodeString raw = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  icu::UnicodeString normalized = U_SUCCESS(status) ? nfc->normalize(raw, status) : raw;
  if (U_FAILURE(status)) normalized = raw;

  std::size_t count = 0;
  bool in_token = false;
  for (int32_t i = 0; i < normalized.length(); i = normalized.moveIndex32(i, 1)) {
    UChar32 cp = normalized.char32At(i);
    bool space = u_isUWhiteSpace(cp);
    if (cfg.mode == TokenizerMode::Char) {
      count += !space;
    } else {
      if (!space && !in_token) ++count;
      in_token = !space;
    }
  }
  return count;
}

}  // namespace stfilter

#endif  // STFILTER_TOKENIZER_HPP
