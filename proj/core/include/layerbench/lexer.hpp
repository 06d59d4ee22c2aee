// Copyright 2026 The layerbench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace layerbench {

enum class TokenKind { kIdentifier, kKeyword, kLiteral, kOperator, kPunctuation };

struct Token {
  TokenKind kind;
  std::string text;
  std::size_t begin = 0;  // byte offset of the first byte
  std::size_t end = 0;    // one past the last byte
  std::size_t line = 1;   // 1-based line of `begin`

  bool operator==(const Token& other) const {
    return kind == other.kind && text == other.text;
  }
};

// Lexical description of a subject language. Comments and whitespace are
// never emitted as tokens; everything else falls into the five Token kinds.
struct SubjectProfile {
  std::string name;
  std::string line_comment;
  std::string block_comment_open;
  std::string block_comment_close;
  std::string string_delims;  // each char opens/closes a string literal
  char char_delim = '\'';
  std::string identifier_rule;  // documented pattern, see kIdentifierRule
  std::set<std::string> keywords;
  // Keywords that can never begin a declaration statement (return, if, ...).
  // The scope resolver uses this to tell `int x;` from `return x;`.
  std::set<std::string> statement_keywords;

  bool is_keyword(std::string_view word) const {
    return keywords.count(std::string(word)) > 0;
  }
};

// The one identifier shape the lexer implements. Profiles declaring any
// other rule are rejected at load time rather than silently mis-lexed.
inline constexpr std::string_view kIdentifierRule = "[A-Za-z_][A-Za-z0-9_]*";

// Built-in profile covering C, C++ and Java style lexis.
SubjectProfile default_cfamily_profile();

// Loads a profile from JSON (same fields as SubjectProfile).
SubjectProfile load_profile(const std::filesystem::path& path);

// Splits `source` into tokens. Unterminated block comments and unterminated
// string/char literals raise Error(E_LEX) with the offending line.
std::vector<Token> tokenize(std::string_view source, const SubjectProfile& profile);

// Token texts joined back together, with a single space only where gluing
// two neighbours would change the token stream. Idempotent, and re-lexing
// the result reproduces the token stream of `source` exactly.
std::string strip_comments_and_ws(std::string_view source, const SubjectProfile& profile);

// True if writing `a` directly followed by `b` would lex as something other
// than the two original tokens.
bool needs_separator(const Token& a, const Token& b, const SubjectProfile& profile);

// True if `name` matches kIdentifierRule and is not a keyword of `profile`.
bool is_valid_identifier(std::string_view name, const SubjectProfile& profile);

}  // namespace layerbench
