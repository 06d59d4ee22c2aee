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

#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "layerbench/lexer.hpp"

namespace layerbench {

// Half-open byte range [begin, end) into one source file.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const Span& other) const {
    return begin == other.begin && end == other.end;
  }
  bool overlaps(const Span& other) const {
    return begin < other.end && other.begin < end;
  }
};

// A function definition found in a token stream: the name token plus the
// full extent from the first header token (return type, qualifiers,
// annotations) through the closing brace of the body.
struct FunctionDef {
  std::size_t name_token = 0;  // index into the token vector
  Span name_span;
  Span full_span;
  Span body_span;  // the braces and everything between them
};

// All definitions of `name` in `tokens`, in source order. A definition is
// an occurrence of `name` followed by a parenthesized list whose matching
// ")" is immediately followed by "{".
std::vector<FunctionDef> find_function_definitions(const std::vector<Token>& tokens,
                                                   std::string_view name);

// Full text of the first definition of `name`; Error(E_FUNCTION_NOT_FOUND)
// if the file has none.
std::string extract_function_text(std::string_view source, const SubjectProfile& profile,
                                  const std::string& name);

// One declared variable and every place it appears inside the function,
// declaration included. Re-declarations of the same name in nested blocks
// are folded into one entry: renaming every occurrence uniformly preserves
// whatever shadowing structure the original had.
struct NamedOccurrences {
  std::string name;
  Span declaration;
  std::vector<Span> occurrences;  // sorted by begin, includes `declaration`
};

struct ScopeMap {
  std::string function_name;
  std::filesystem::path file;  // as given by the caller, for bookkeeping
  Span declaration_name;       // the function's own name token
  Span function_span;
  std::vector<NamedOccurrences> params;
  std::vector<NamedOccurrences> locals;
  // Identifiers used in the function but declared elsewhere (globals,
  // fields, called functions). New names must stay clear of these.
  std::set<std::string> free_names;
};

// Resolves parameters and block-scoped locals of `function_name` within
// `source`. Declaration statements are recognized lexically: a type prefix
// of keyword/identifier tokens (with */&/::/<>/[] mixed in) followed by the
// declared name and one of "=", ",", ";", "[" or ")". Statements opening
// with a statement keyword (return, if, throw, ...) are never declarations.
// If the file defines `name` more than once (overloads), the first
// definition is resolved. Error(E_FUNCTION_NOT_FOUND) if there is none.
ScopeMap resolve_function_scope(std::string_view source, const SubjectProfile& profile,
                                const std::string& function_name,
                                const std::filesystem::path& file = {});

}  // namespace layerbench
