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

#include "layerbench/lexer.hpp"

#include <nlohmann/json.hpp>

#include "layerbench/error.hpp"
#include "layerbench/fs_util.hpp"

namespace layerbench {
namespace {

bool ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

bool ident_continue(char c) {
  return ident_start(c) || (c >= '0' && c <= '9');
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}

constexpr std::string_view kPunctuation = "(){}[];,";
constexpr std::string_view kOperatorChars = "+-*/%<>=!&|^~?:.#@\\";

constexpr std::string_view kOps3[] = {"<<=", ">>=", "...", "->*"};
constexpr std::string_view kOps2[] = {"==", "!=", "<=", ">=", "&&", "||", "<<",
                                      ">>", "+=", "-=", "*=", "/=", "%=", "&=",
                                      "|=", "^=", "->", "++", "--", "::"};

class Lexer {
 public:
  Lexer(std::string_view src, const SubjectProfile& profile)
      : src_(src), profile_(profile) {}

  std::vector<Token> run() {
    std::vector<Token> tokens;
    while (skip_blanks()) {
      tokens.push_back(next_token());
    }
    return tokens;
  }

 private:
  [[noreturn]] void fail(const std::string& what, std::size_t line) {
    throw Error(kErrLex, what + " at line " + std::to_string(line));
  }

  bool at(std::string_view needle) const {
    return needle.size() > 0 && src_.compare(pos_, needle.size(), needle) == 0;
  }

  char cur() const { return src_[pos_]; }

  void advance() {
    if (src_[pos_] == '\n') ++line_;
    ++pos_;
  }

  // Skips whitespace and comments; returns false at end of input.
  bool skip_blanks() {
    for (;;) {
      if (pos_ >= src_.size()) return false;
      if (is_space(cur())) {
        advance();
        continue;
      }
      if (at(profile_.line_comment)) {
        while (pos_ < src_.size() && cur() != '\n') ++pos_;
        continue;
      }
      if (at(profile_.block_comment_open)) {
        std::size_t open_line = line_;
        pos_ += profile_.block_comment_open.size();
        while (pos_ < src_.size() && !at(profile_.block_comment_close)) advance();
        if (pos_ >= src_.size()) fail("unterminated block comment", open_line);
        pos_ += profile_.block_comment_close.size();
        continue;
      }
      return true;
    }
  }

  Token make(TokenKind kind, std::size_t begin, std::size_t begin_line) {
    return Token{kind, std::string(src_.substr(begin, pos_ - begin)), begin, pos_,
                 begin_line};
  }

  Token quoted_literal(char delim, const char* what) {
    std::size_t begin = pos_, begin_line = line_;
    ++pos_;  // opening delimiter
    while (pos_ < src_.size()) {
      char c = cur();
      if (c == '\\') {
        pos_ += 2;
        continue;
      }
      if (c == '\n') break;
      ++pos_;
      if (c == delim) return make(TokenKind::kLiteral, begin, begin_line);
    }
    fail(std::string("unterminated ") + what, begin_line);
  }

  Token number_literal() {
    std::size_t begin = pos_, begin_line = line_;
    while (pos_ < src_.size()) {
      char c = cur();
      if (ident_continue(c) || c == '.') {
        ++pos_;
        continue;
      }
      // Exponent sign: 1e+5, 0x1p-3.
      if ((c == '+' || c == '-') && pos_ > begin) {
        char prev = src_[pos_ - 1];
        if (prev == 'e' || prev == 'E' || prev == 'p' || prev == 'P') {
          ++pos_;
          continue;
        }
      }
      break;
    }
    return make(TokenKind::kLiteral, begin, begin_line);
  }

  Token next_token() {
    std::size_t begin = pos_, begin_line = line_;
    char c = cur();

    if (profile_.string_delims.find(c) != std::string::npos) {
      return quoted_literal(c, "string literal");
    }
    if (c == profile_.char_delim) {
      return quoted_literal(c, "character literal");
    }
    if (ident_start(c)) {
      while (pos_ < src_.size() && ident_continue(cur())) ++pos_;
      Token tok = make(TokenKind::kIdentifier, begin, begin_line);
      if (profile_.is_keyword(tok.text)) tok.kind = TokenKind::kKeyword;
      return tok;
    }
    if (is_digit(c) ||
        (c == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
      return number_literal();
    }
    if (kPunctuation.find(c) != std::string_view::npos) {
      ++pos_;
      return make(TokenKind::kPunctuation, begin, begin_line);
    }
    for (std::string_view op : kOps3) {
      if (at(op)) {
        pos_ += 3;
        return make(TokenKind::kOperator, begin, begin_line);
      }
    }
    for (std::string_view op : kOps2) {
      if (at(op)) {
        pos_ += 2;
        return make(TokenKind::kOperator, begin, begin_line);
      }
    }
    if (kOperatorChars.find(c) != std::string_view::npos) {
      ++pos_;
      return make(TokenKind::kOperator, begin, begin_line);
    }
    fail("unexpected byte '" + std::string(1, c) + "'", begin_line);
  }

  std::string_view src_;
  const SubjectProfile& profile_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

const std::set<std::string>& cfamily_keywords() {
  static const std::set<std::string> kws = {
      // C/C++
      "alignas", "alignof", "auto", "bool", "break", "case", "catch", "char",
      "class", "const", "constexpr", "continue", "default", "delete", "do",
      "double", "else", "enum", "extern", "false", "float", "for", "friend",
      "goto", "if", "inline", "int", "long", "mutable", "namespace", "new",
      "noexcept", "nullptr", "operator", "override", "private", "protected",
      "public", "register", "return", "short", "signed", "sizeof", "static",
      "struct", "switch", "template", "this", "throw", "true", "try",
      "typedef", "typename", "union", "unsigned", "using", "virtual", "void",
      "volatile", "wchar_t", "while",
      // Java additions
      "abstract", "assert", "boolean", "byte", "extends", "final", "finally",
      "implements", "import", "instanceof", "interface", "native", "null",
      "package", "strictfp", "super", "synchronized", "throws", "transient",
      "var",
  };
  return kws;
}

const std::set<std::string>& cfamily_statement_keywords() {
  static const std::set<std::string> kws = {
      "assert",   "break",   "case",    "catch",  "continue", "default",
      "delete",   "do",      "else",    "false",  "finally",  "for",
      "goto",     "if",      "import",  "namespace", "new",   "nullptr",
      "null",     "operator", "package", "return", "sizeof",  "super",
      "switch",   "this",    "throw",   "true",   "try",      "typedef",
      "using",    "while",
  };
  return kws;
}

}  // namespace

SubjectProfile default_cfamily_profile() {
  SubjectProfile profile;
  profile.name = "cfamily";
  profile.line_comment = "//";
  profile.block_comment_open = "/*";
  profile.block_comment_close = "*/";
  profile.string_delims = "\"";
  profile.char_delim = '\'';
  profile.identifier_rule = std::string(kIdentifierRule);
  profile.keywords = cfamily_keywords();
  profile.statement_keywords = cfamily_statement_keywords();
  return profile;
}

SubjectProfile load_profile(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(kErrProfile, path.string() + ": " + e.what());
  }

  auto require = [&](const char* key) -> const nlohmann::json& {
    if (!doc.contains(key)) {
      throw Error(kErrProfile, path.string() + ": missing field '" + key + "'");
    }
    return doc.at(key);
  };

  SubjectProfile profile;
  try {
    profile.name = require("name").get<std::string>();
    profile.line_comment = require("line_comment").get<std::string>();
    auto block = require("block_comment");
    if (!block.is_array() || block.size() != 2) {
      throw Error(kErrProfile, path.string() + ": block_comment must be [open, close]");
    }
    profile.block_comment_open = block[0].get<std::string>();
    profile.block_comment_close = block[1].get<std::string>();
    for (const auto& delim : require("string_delims")) {
      auto s = delim.get<std::string>();
      if (s.size() != 1) {
        throw Error(kErrProfile, path.string() + ": string delimiters must be single chars");
      }
      profile.string_delims += s;
    }
    auto char_delim = require("char_delim").get<std::string>();
    if (char_delim.size() != 1) {
      throw Error(kErrProfile, path.string() + ": char_delim must be a single char");
    }
    profile.char_delim = char_delim[0];
    profile.identifier_rule = require("identifier_rule").get<std::string>();
    for (const auto& kw : require("keywords")) {
      profile.keywords.insert(kw.get<std::string>());
    }
    if (doc.contains("statement_keywords")) {
      for (const auto& kw : doc.at("statement_keywords")) {
        profile.statement_keywords.insert(kw.get<std::string>());
      }
    } else {
      profile.statement_keywords = cfamily_statement_keywords();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(kErrProfile, path.string() + ": " + e.what());
  }

  if (profile.identifier_rule != kIdentifierRule) {
    throw Error(kErrProfile, path.string() + ": unsupported identifier rule '" +
                                 profile.identifier_rule + "' (lexer implements '" +
                                 std::string(kIdentifierRule) + "')");
  }
  if (profile.line_comment.empty() || profile.block_comment_open.empty() ||
      profile.block_comment_close.empty() || profile.string_delims.empty()) {
    throw Error(kErrProfile, path.string() + ": comment and string markers must be non-empty");
  }
  return profile;
}

std::vector<Token> tokenize(std::string_view source, const SubjectProfile& profile) {
  return Lexer(source, profile).run();
}

bool needs_separator(const Token& a, const Token& b, const SubjectProfile& profile) {
  std::vector<Token> relexed;
  try {
    relexed = tokenize(a.text + b.text, profile);
  } catch (const Error&) {
    return true;  // gluing formed an unterminated comment or literal
  }
  return !(relexed.size() == 2 && relexed[0].text == a.text &&
           relexed[1].text == b.text);
}

std::string strip_comments_and_ws(std::string_view source, const SubjectProfile& profile) {
  std::vector<Token> tokens = tokenize(source, profile);
  std::string out;
  out.reserve(source.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0 && needs_separator(tokens[i - 1], tokens[i], profile)) {
      out.push_back(' ');
    }
    out += tokens[i].text;
  }
  return out;
}

bool is_valid_identifier(std::string_view name, const SubjectProfile& profile) {
  if (name.empty() || !ident_start(name[0])) return false;
  for (char c : name.substr(1)) {
    if (!ident_continue(c)) return false;
  }
  return !profile.is_keyword(name);
}

}  // namespace layerbench
