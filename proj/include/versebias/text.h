// Copyright 2026 The Versebias Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Text helpers shared by every stage: whitespace normalization, ASCII case
// folding and the word tokenizer used for mention matching, sentiment
// features and style-transfer n-grams.

#ifndef VERSEBIAS_TEXT_H_
#define VERSEBIAS_TEXT_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace versebias {

// Strips leading/trailing whitespace and collapses internal runs to a single
// space.
std::string NormalizeWhitespace(std::string_view text);

// ASCII lowercase; bytes >= 0x80 are passed through untouched.
std::string ToLowerAscii(std::string_view text);

// Lowercased, whitespace-normalized form used for matching and dedup.
std::string MatchKey(std::string_view text);

// True for bytes that belong to a word token: ASCII letters, digits,
// apostrophes and any non-ASCII byte (so UTF-8 letters stay inside words).
bool IsWordByte(unsigned char c);

// Splits text into lowercase word tokens. Every punctuation character that is
// not part of a word becomes its own single-character token.
std::vector<std::string> WordTokens(std::string_view text);

// Joins tokens with single spaces, except that closing punctuation attaches
// to the preceding token.
std::string Detokenize(std::span<const std::string> tokens);

// Joins tokens with single spaces.
std::string JoinTokens(std::span<const std::string> tokens,
                       std::string_view sep = " ");

bool IsPunctuationToken(std::string_view token);

}  // namespace versebias

#endif  // VERSEBIAS_TEXT_H_
