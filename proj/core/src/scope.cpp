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

#include "layerbench/scope.hpp"

#include <algorithm>
#include <map>

#include "layerbench/error.hpp"

namespace layerbench {
namespace {

constexpr std::size_t kNone = std::size_t(-1);

bool has_text(const Token& t, std::string_view text) { return t.text == text; }

bool is_type_glue(const Token& t) {
  // Operators that may appear inside a type prefix: pointers, references,
  // template angles, scope resolution, annotations.
  return t.kind == TokenKind::kOperator &&
         (t.text == "*" || t.text == "&" || t.text == "<" || t.text == ">" ||
          t.text == "::" || t.text == "@");
}

std::size_t match_forward(const std::vector<Token>& tokens, std::size_t open_idx,
                          std::string_view open, std::string_view close) {
  int depth = 0;
  for (std::size_t i = open_idx; i < tokens.size(); ++i) {
    if (tokens[i].text == open) ++depth;
    if (tokens[i].text == close) {
      if (--depth == 0) return i;
    }
  }
  return kNone;
}

// Start of the definition header: walk left over return type, qualifiers
// and annotations until something that clearly ends the previous construct.
std::size_t header_start(const std::vector<Token>& tokens, std::size_t name_idx) {
  std::size_t h = name_idx;
  while (h > 0) {
    const Token& prev = tokens[h - 1];
    bool keep = prev.kind == TokenKind::kIdentifier ||
                prev.kind == TokenKind::kKeyword || is_type_glue(prev) ||
                has_text(prev, "[") || has_text(prev, "]") || has_text(prev, "...");
    if (!keep) break;
    --h;
  }
  return h;
}

struct DeclFound {
  std::size_t name_idx;
};

}  // namespace

std::vector<FunctionDef> find_function_definitions(const std::vector<Token>& tokens,
                                                   std::string_view name) {
  std::vector<FunctionDef> defs;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    if (tokens[i].kind != TokenKind::kIdentifier || tokens[i].text != name) continue;
    if (!has_text(tokens[i + 1], "(")) continue;
    std::size_t rparen = match_forward(tokens, i + 1, "(", ")");
    if (rparen == kNone || rparen + 1 >= tokens.size()) continue;
    if (!has_text(tokens[rparen + 1], "{")) continue;
    std::size_t rbrace = match_forward(tokens, rparen + 1, "{", "}");
    if (rbrace == kNone) continue;

    FunctionDef def;
    def.name_token = i;
    def.name_span = {tokens[i].begin, tokens[i].end};
    std::size_t h = header_start(tokens, i);
    def.full_span = {tokens[h].begin, tokens[rbrace].end};
    def.body_span = {tokens[rparen + 1].begin, tokens[rbrace].end};
    defs.push_back(def);
  }
  return defs;
}

std::string extract_function_text(std::string_view source, const SubjectProfile& profile,
                                  const std::string& name) {
  auto tokens = tokenize(source, profile);
  auto defs = find_function_definitions(tokens, name);
  if (defs.empty()) {
    throw Error(kErrFunctionNotFound, "no definition of '" + name + "'");
  }
  const Span& span = defs.front().full_span;
  return std::string(source.substr(span.begin, span.end - span.begin));
}

namespace {

// Lexical declaration scanner for one statement start. Returns the declared
// name token indices (several for `int a, b;`), or empty if the statement
// is not a declaration.
class DeclScanner {
 public:
  DeclScanner(const std::vector<Token>& tokens, const SubjectProfile& profile,
              std::size_t body_end)
      : tokens_(tokens), profile_(profile), end_(body_end) {}

  std::vector<std::size_t> scan(std::size_t start) {
    std::vector<std::size_t> names;
    std::size_t name_idx = find_first_declared_name(start);
    if (name_idx == kNone) return names;
    names.push_back(name_idx);

    // Walk the declarator list: initializers are skipped at depth 0 until a
    // "," introduces the next declarator or ";" / the for-header ")" ends it.
    std::size_t p = after_array_suffix(name_idx + 1);
    int depth = 0;
    while (p < end_) {
      const Token& t = tokens_[p];
      if (depth == 0) {
        if (has_text(t, ",")) {
          std::size_t q = p + 1;
          while (q < end_ && (has_text(tokens_[q], "*") || has_text(tokens_[q], "&"))) ++q;
          if (q < end_ && tokens_[q].kind == TokenKind::kIdentifier) {
            names.push_back(q);
            p = after_array_suffix(q + 1);
            continue;
          }
          return names;
        }
        if (has_text(t, ";")) return names;
      }
      if (has_text(t, "(") || has_text(t, "[") || has_text(t, "{")) ++depth;
      if (has_text(t, ")") || has_text(t, "]") || has_text(t, "}")) {
        if (--depth < 0) return names;  // closed the enclosing for-header
      }
      ++p;
    }
    return names;
  }

 private:
  bool is_statement_keyword(const Token& t) const {
    return t.kind == TokenKind::kKeyword &&
           profile_.statement_keywords.count(t.text) > 0;
  }

  std::size_t after_array_suffix(std::size_t p) const {
    while (p < end_ && has_text(tokens_[p], "[")) {
      std::size_t close = match_forward(tokens_, p, "[", "]");
      if (close == kNone || close >= end_) return p;
      p = close + 1;
    }
    return p;
  }

  bool begins_declarator_tail(const Token& t) const {
    return has_text(t, "=") || has_text(t, ",") || has_text(t, ";") || has_text(t, ")");
  }

  // Scans a type prefix (keywords, identifiers, * & :: < > @ [ ]) and
  // returns the declared-name token index, or kNone.
  std::size_t find_first_declared_name(std::size_t j) {
    bool type_seen = false;
    while (j + 1 < end_) {
      const Token& t = tokens_[j];
      if (t.kind == TokenKind::kKeyword) {
        if (is_statement_keyword(t)) return kNone;
        type_seen = true;
        ++j;
        continue;
      }
      if (t.kind == TokenKind::kIdentifier) {
        const Token& next = tokens_[j + 1];
        if (begins_declarator_tail(next)) {
          return type_seen ? j : kNone;
        }
        if (has_text(next, "[")) {
          std::size_t close = match_forward(tokens_, j + 1, "[", "]");
          if (close == kNone || close + 1 >= end_) return kNone;
          const Token& after = tokens_[close + 1];
          if (after.kind == TokenKind::kIdentifier) {
            type_seen = true;  // `Foo[] bar` style array type
            j = close + 1;
            continue;
          }
          return type_seen && begins_declarator_tail(after) ? j : kNone;
        }
        if (next.kind == TokenKind::kIdentifier || is_type_glue(next)) {
          type_seen = true;
          ++j;
          continue;
        }
        return kNone;
      }
      if (is_type_glue(t)) {
        ++j;
        continue;
      }
      return kNone;
    }
    return kNone;
  }

  const std::vector<Token>& tokens_;
  const SubjectProfile& profile_;
  std::size_t end_;
};

}  // namespace

ScopeMap resolve_function_scope(std::string_view source, const SubjectProfile& profile,
                                const std::string& function_name,
                                const std::filesystem::path& file) {
  auto tokens = tokenize(source, profile);
  auto defs = find_function_definitions(tokens, function_name);
  if (defs.empty()) {
    std::string where = file.empty() ? std::string("source") : file.string();
    throw Error(kErrFunctionNotFound,
                "no definition of '" + function_name + "' in " + where);
  }
  const FunctionDef& def = defs.front();

  ScopeMap scope;
  scope.function_name = function_name;
  scope.file = file;
  scope.declaration_name = def.name_span;
  scope.function_span = def.full_span;

  std::size_t lparen = def.name_token + 1;
  std::size_t rparen = match_forward(tokens, lparen, "(", ")");
  std::size_t body_open = rparen + 1;
  std::size_t body_close = match_forward(tokens, body_open, "{", "}");

  // Entries are keyed by name; a nested re-declaration folds into the first
  // entry so each name stays unique in the map.
  std::vector<NamedOccurrences> entries;
  std::map<std::string, std::size_t> index_of;
  auto record = [&](std::size_t tok_idx, bool as_param) -> NamedOccurrences& {
    const Token& t = tokens[tok_idx];
    auto it = index_of.find(t.text);
    if (it != index_of.end()) return entries[it->second];
    index_of.emplace(t.text, entries.size());
    NamedOccurrences entry;
    entry.name = t.text;
    entry.declaration = {t.begin, t.end};
    if (as_param) entry.occurrences.push_back(entry.declaration);
    entries.push_back(std::move(entry));
    return entries.back();
  };

  // Parameters: split the parameter list at top-level commas; the name of a
  // piece is its last identifier before any default-value "=".
  std::size_t param_count = 0;
  {
    std::size_t piece_start = lparen + 1;
    int depth = 0;
    for (std::size_t i = lparen + 1; i <= rparen; ++i) {
      bool at_end = i == rparen && depth == 0;
      bool at_comma = depth == 0 && has_text(tokens[i], ",");
      if (has_text(tokens[i], "(") || has_text(tokens[i], "[")) ++depth;
      if (has_text(tokens[i], ")") || has_text(tokens[i], "]")) --depth;
      if (!at_end && !at_comma) continue;
      std::size_t name_idx = kNone;
      for (std::size_t j = piece_start; j < i; ++j) {
        if (has_text(tokens[j], "=")) break;
        if (tokens[j].kind == TokenKind::kIdentifier) name_idx = j;
      }
      if (name_idx != kNone) {
        record(name_idx, /*as_param=*/true);
        ++param_count;
      }
      piece_start = i + 1;
    }
  }

  // Locals: run the declaration scanner at each statement start in the body.
  DeclScanner scanner(tokens, profile, body_close);
  auto scan_at = [&](std::size_t start) {
    for (std::size_t name_idx : scanner.scan(start)) {
      record(name_idx, /*as_param=*/false);
    }
  };
  scan_at(body_open + 1);
  for (std::size_t i = body_open + 1; i < body_close; ++i) {
    const Token& t = tokens[i];
    if (has_text(t, ";") || has_text(t, "{") || has_text(t, "}")) {
      scan_at(i + 1);
    } else if (has_text(t, "(") && i > 0 && tokens[i - 1].kind == TokenKind::kKeyword &&
               (tokens[i - 1].text == "for" || tokens[i - 1].text == "if" ||
                tokens[i - 1].text == "while" || tokens[i - 1].text == "switch")) {
      scan_at(i + 1);
    }
  }

  // Occurrences and free names in one pass over the body. Identifiers after
  // "." / "->" / "::" are member accesses, never our variables.
  for (std::size_t i = body_open + 1; i < body_close; ++i) {
    const Token& t = tokens[i];
    if (t.kind != TokenKind::kIdentifier) continue;
    const Token& prev = tokens[i - 1];
    if (has_text(prev, ".") || has_text(prev, "->") || has_text(prev, "::")) continue;
    auto it = index_of.find(t.text);
    if (it != index_of.end()) {
      entries[it->second].occurrences.push_back({t.begin, t.end});
    } else {
      scope.free_names.insert(t.text);
    }
  }

  for (auto& entry : entries) {
    std::sort(entry.occurrences.begin(), entry.occurrences.end(),
              [](const Span& a, const Span& b) { return a.begin < b.begin; });
    entry.occurrences.erase(
        std::unique(entry.occurrences.begin(), entry.occurrences.end()),
        entry.occurrences.end());
  }

  // The first `param_count` recorded entries are parameters (recording order
  // follows the parameter list), the rest are locals.
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i < param_count) {
      scope.params.push_back(entries[i]);
    } else {
      scope.locals.push_back(entries[i]);
    }
  }
  return scope;
}

}  // namespace layerbench
