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
#include <string>
#include <vector>

#include "layerbench/lexer.hpp"
#include "layerbench/scope.hpp"

namespace layerbench {

// One reference to a function name: the name token, in `file` (relative to
// the indexed root).
struct CallSite {
  std::filesystem::path file;
  Span name_span;
  std::size_t line = 0;
};

// Conditions that make renaming a function unsafe under a purely lexical
// rewrite. Screening is conservative: a flagged function is excluded from
// function renaming rather than risking a behavior change.
struct Hazards {
  bool overloaded = false;               // second definition in the same file
  bool overridden_or_inherited = false;  // same-name definition in another file
  bool reflective_or_string_refs = false;  // name appears inside a string literal

  bool any() const {
    return overloaded || overridden_or_inherited || reflective_or_string_refs;
  }
};

struct CallSiteIndex {
  std::string function_name;
  std::vector<CallSite> sites;        // references other than definitions
  std::vector<CallSite> definitions;  // definition name tokens
  Hazards hazards;
};

// True for files the indexer treats as subject source (by extension).
bool is_source_file(const std::filesystem::path& path);

// Indexes every reference to `function_name` across the source files under
// `project_root` (test files included). A reference is an identifier token
// immediately followed by "(". It is a definition when the matching ")" is
// followed by "{", otherwise a site to rewrite (calls and prototypes).
CallSiteIndex index_call_sites(const std::filesystem::path& project_root,
                               const SubjectProfile& profile,
                               const std::string& function_name);

}  // namespace layerbench
