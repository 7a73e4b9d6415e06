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

#include "stfilter/tokenizer.hpp"

#include "gtest/gtest.h"

namespace stfilter {
namespace {

constexpr TokenizerConfig kWs{TokenizerMode::Whitespace};
constexpr TokenizerConfig kChar{TokenizerMode::Char};

TEST(Tokenizer, EmptyIsZero) {
  EXPECT_EQ(token_count("", kWs), 0u);
  EXPECT_EQ(token_count("", kChar), 0u);
  EXPECT_EQ(token_count(" \t ", kWs), 0u);
  EXPECT_EQ(token_count(" \t ", kChar), 0u);
}

TEST(Tokenizer, WhitespaceRuns) {
  EXPECT_EQ(token_count("a  b\tc", kWs), 3u);
  EXPECT_EQ(token_count("  leading and trailing  ", kWs), 3u);
}

TEST(Tokenizer, CharsExcludeWhitespace) {
  EXPECT_EQ(token_count("ab c", kChar), 3u);
}

TEST(Tokenizer, UnicodeWhitespaceSeparates) {
  // U+3000 IDEOGRAPHIC SPACE and U+00A0 NO-BREAK SPACE.
  EXPECT_EQ(token_count("\xE6\x97\xA5\xE6\x9C\xAC\xE3\x80\x80\xE8\xAA\x9E", kWs), 2u);
  EXPECT_EQ(token_count("a\xC2\xA0" "b", kWs), 2u);
  EXPECT_EQ(token_count("\xE6\x97\xA5\xE6\x9C\xAC\xE3\x80\x80\xE8\xAA\x9E", kChar), 3u);
}

TEST(Tokenizer, NfcBeforeCounting) {
  // "e" + U+0301 COMBINING ACUTE composes to one scalar value; U+00E9 is
  // already composed.
  EXPECT_EQ(token_count("e\xCC\x81t\xC3\xA9", kChar), 3u);
  EXPECT_EQ(token_count("\xC3\xA9t\xC3\xA9", kChar), 3u);
  EXPECT_EQ(token_count("e\xCC\x81 t", kWs), 2u);
  // Combining marks with no composed form still count separately.
  EXPECT_EQ(token_count("q\xCC\x81", kChar), 2u);
}

}  // namespace
}  // namespace stfilter
