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

#include "versebias/text.h"

#include <cctype>

namespace versebias {

namespace {

bool IsSpace(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool AttachesLeft(std::string_view token) {
  if (token.size() != 1) return false;
  switch (token[0]) {
    case ',': case '.': case ';': case ':': case '!': case '?': case ')':
    case ']': case '}':
      return true;
    default:
      return false;
  }
}

}  // namespace

std::string NormalizeWhitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (IsSpace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(c));
  }
  return out;
}

std::string ToLowerAscii(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string MatchKey(std::string_view text) {
  return ToLowerAscii(NormalizeWhitespace(text));
}

bool IsWordByte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '\'' || c >= 0x80;
}

std::vector<std::string> WordTokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (IsWordByte(c)) {
      current.push_back(static_cast<char>(c));
      continue;
    }
    if (!current.empty()) {
      tokens.push_back(ToLowerAscii(current));
      current.clear();
    }
    if (!IsSpace(c)) tokens.emplace_back(1, static_cast<char>(c));
  }
  if (!current.empty()) tokens.push_back(ToLowerAscii(current));
  return tokens;
}

std::string Detokenize(std::span<const std::string> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty() && !AttachesLeft(t)) out.push_back(' ');
    out += t;
  }
  return out;
}

std::string JoinTokens(std::span<const std::string> tokens,
                       std::string_view sep) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += sep;
    out += tokens[i];
  }
  return out;
}

bool IsPunctuationToken(std::string_view token) {
  if (token.empty()) return true;
  for (unsigned char c : token) {
    if (IsWordByte(c) && c != '\'') return false;
  }
  return true;
}

}  // namespace versebias
