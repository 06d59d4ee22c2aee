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

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "layerbench/callsite.hpp"
#include "layerbench/lexer.hpp"
#include "layerbench/scope.hpp"

namespace layerbench {

class LlmGateway;

enum class RenameTargets { kVars, kFuncs, kBoth };

RenameTargets rename_targets_from_string(const std::string& name);  // Error(E_BAD_ARGS)
std::string to_string(RenameTargets targets);

struct RenameCandidate {
  std::string name;
  bool is_function = false;
};

// A complete, validated old->new mapping for one variant. `mapping` is
// ordered so serialization is stable.
struct RenamePlan {
  std::string scheme;  // "hash" or "rephrase"
  RenameTargets targets = RenameTargets::kVars;
  uint64_t clock_stamp = 0;
  std::map<std::string, std::string> mapping;
};

// Derives a replacement for `name` from sha256("<name>|<clock_stamp>"),
// keeping the first 16 hex digits under a "v_" or "f_" prefix. On a clash
// with `taken` (or a keyword) the digest input is re-salted by appending
// "|1", "|2", ... until the result is free.
std::string hash_identifier(const std::string& name, bool is_function,
                            uint64_t clock_stamp, const SubjectProfile& profile,
                            const std::set<std::string>& taken);

// Deterministic plan: candidates are processed in order, each replacement is
// kept out of `reserved`, earlier replacements and all old names.
RenamePlan build_hash_plan(const std::vector<RenameCandidate>& candidates,
                           RenameTargets targets, uint64_t clock_stamp,
                           const SubjectProfile& profile,
                           const std::set<std::string>& reserved);

// Asks the model for natural replacement names and validates the proposal:
// every candidate mapped, names valid, non-keyword, pairwise distinct and
// outside `reserved`. Invalid proposals are re-requested with the violation
// appended; after `max_rounds` the plan is abandoned (E_RENAME_INCOMPLETE).
RenamePlan build_rephrase_plan(const std::vector<RenameCandidate>& candidates,
                               RenameTargets targets, uint64_t clock_stamp,
                               const SubjectProfile& profile,
                               const std::set<std::string>& reserved,
                               LlmGateway& gateway, const std::string& function_name,
                               const std::string& function_text, int max_rounds = 3);

// Candidate and reserved-name derivation from a resolved scope: vars covers
// params and locals, funcs covers the function's own name, both covers all.
// `extra_reserved` carries project-wide names the scope cannot see.
std::vector<RenameCandidate> rename_candidates(const ScopeMap& scope, RenameTargets targets);

RenamePlan hash_rename_plan(const ScopeMap& scope, RenameTargets targets,
                            uint64_t clock_stamp, const SubjectProfile& profile,
                            const std::set<std::string>& extra_reserved = {});

RenamePlan rephrase_rename_plan(const std::string& function_source, const ScopeMap& scope,
                                RenameTargets targets, uint64_t clock_stamp,
                                const SubjectProfile& profile, LlmGateway& gateway,
                                const std::set<std::string>& extra_reserved = {},
                                int max_rounds = 3);

struct TextEdit {
  Span span;
  std::string replacement;
};

// Applies byte-span replacements. Overlapping spans abort with
// E_RENAME_OVERLAP before anything is produced, so callers that
// compute-then-write never leave a partial result behind.
std::string apply_text_edits(const std::string& text, std::vector<TextEdit> edits);

// Renames parameter/local occurrences of the mapped names inside the named
// function only; bytes outside the function body are untouched. Names in the
// mapping that the function does not declare are ignored.
std::string rename_in_function(const std::string& text, const std::string& function_name,
                               const std::map<std::string, std::string>& mapping,
                               const SubjectProfile& profile);

// Rewrites every definition and call site of `old_name` in source files under
// `root`. All new file contents are computed before the first write. Returns
// the number of occurrences rewritten.
int rename_function_everywhere(const std::filesystem::path& root,
                               const std::string& old_name, const std::string& new_name,
                               const SubjectProfile& profile);

// Applies a plan to one checkout in place: variable entries rewrite their
// occurrences inside the function at `scope.file`, a function entry rewrites
// every definition, prototype and call site under `project_root`. When the
// plan touches the function name, `calls` must be hazard-free
// (Error E_HAZARD otherwise, before any write). Returns spans rewritten.
int apply_rename(const std::filesystem::path& project_root, const RenamePlan& plan,
                 const ScopeMap& scope, const CallSiteIndex& calls,
                 const SubjectProfile& profile);

}  // namespace layerbench
