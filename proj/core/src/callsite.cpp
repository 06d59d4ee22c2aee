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

#include "layerbench/callsite.hpp"

#include <set>

#include "layerbench/fs_util.hpp"

namespace layerbench {
namespace {

const std::set<std::string>& source_extensions() {
  static const std::set<std::string> exts = {".c",   ".h",  ".cc",  ".hh",
                                             ".cpp", ".hpp", ".cxx", ".hxx",
                                             ".java", ".cs"};
  return exts;
}

std::size_t matching_paren(const std::vector<Token>& tokens, std::size_t open_idx) {
  int depth = 0;
  for (std::size_t i = open_idx; i < tokens.size(); ++i) {
    if (tokens[i].text == "(") ++depth;
    if (tokens[i].text == ")" && --depth == 0) return i;
  }
  return std::size_t(-1);
}

}  // namespace

bool is_source_file(const std::filesystem::path& path) {
  return source_extensions().count(path.extension().string()) > 0;
}

CallSiteIndex index_call_sites(const std::filesystem::path& project_root,
                               const SubjectProfile& profile,
                               const std::string& function_name) {
  CallSiteIndex index;
  index.function_name = function_name;

  std::set<std::filesystem::path> files_with_definition;
  for (const auto& rel : list_files(project_root)) {
    if (!is_source_file(rel)) continue;
    std::string text = read_file(project_root / rel);
    auto tokens = tokenize(text, profile);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const Token& t = tokens[i];
      if (t.kind == TokenKind::kLiteral &&
          profile.string_delims.find(t.text[0]) != std::string::npos &&
          t.text.find(function_name) != std::string::npos) {
        index.hazards.reflective_or_string_refs = true;
      }
      if (t.kind != TokenKind::kIdentifier || t.text != function_name) continue;
      if (i + 1 >= tokens.size() || tokens[i + 1].text != "(") continue;
      CallSite site{rel, {t.begin, t.end}, t.line};
      std::size_t rparen = matching_paren(tokens, i + 1);
      bool is_definition = rparen != std::size_t(-1) && rparen + 1 < tokens.size() &&
                           tokens[rparen + 1].text == "{";
      if (is_definition) {
        if (files_with_definition.count(rel)) index.hazards.overloaded = true;
        files_with_definition.insert(rel);
        index.definitions.push_back(site);
      } else {
        index.sites.push_back(site);
      }
    }
  }
  if (files_with_definition.size() > 1) {
    index.hazards.overridden_or_inherited = true;
  }
  return index;
}

}  // namespace layerbench
