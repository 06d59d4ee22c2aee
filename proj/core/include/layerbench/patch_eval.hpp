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
#include <optional>
#include <string>
#include <vector>

#include "layerbench/corpus.hpp"
#include "layerbench/lexer.hpp"

namespace layerbench {

// One repair attempt from an agent: a full replacement for a named function
// in a named file, parsed from a JSONL line.
struct PatchAttempt {
  std::string bug_id;
  std::string variant_id;  // empty when the attempt targets the original bug
  int attempt = 0;         // 1-based position in the agent's output
  std::filesystem::path file;
  std::string function_name;
  std::string replacement;

  const std::string& target_id() const { return variant_id.empty() ? bug_id : variant_id; }
};

// Parses one line of an agent's patch stream. Malformed lines (bad JSON or
// missing fields) yield nullopt so the caller can skip them.
std::optional<PatchAttempt> parse_patch_attempt(const std::string& line);

struct PatchJudgment {
  bool compiled = false;   // the patched checkout builds
  bool plausible = false;  // builds and the full test command passes
  bool syntactic = false;  // canonical token form equals the reference fix
  bool exact = false;      // comment/whitespace-stripped text equals the fix
  std::string detail;      // short failure summary when not plausible
};

// Canonical form for syntactic comparison: comments and whitespace are gone
// and every identifier is replaced by ID1, ID2, ... in order of first
// occurrence. Keywords, literals, operators and punctuation stay verbatim.
std::string canonical_token_signature(std::string_view text, const SubjectProfile& profile);

bool judge_exact_match(const std::string& candidate, const std::string& reference,
                       const SubjectProfile& profile);
bool judge_syntactic_equivalence(const std::string& candidate, const std::string& reference,
                                 const SubjectProfile& profile);

struct JudgeOptions {
  double timeout_s = 120.0;
};

// Stages the buggy checkout of `instance` into `work_dir`, replaces the span
// of the named function in the named file with the attempt's text, rebuilds
// and runs the full test command. Match metrics are computed only for
// plausible patches. Never throws for agent mistakes (missing file, unknown
// function, broken code); those come back as non-plausible judgments.
PatchJudgment judge_patch(const Benchmark& benchmark, const BugInstance& instance,
                          const PatchAttempt& attempt, const std::filesystem::path& work_dir,
                          const JudgeOptions& options = {});

struct AttemptJudgment {
  PatchAttempt attempt;
  PatchJudgment judgment;
};

// Judgment for a whole attempt sequence against one instance. Bug-level
// flags are disjunctions over attempts: plausible = any plausible attempt,
// syntactic/exact = any attempt that is plausible and matches.
struct PatchSetResult {
  std::string target_id;
  std::vector<AttemptJudgment> attempts;
  bool plausible = false;
  bool syntactic = false;
  bool exact = false;
};

// Evaluates up to `budget` attempts in order, each in its own directory
// under `work_root`. Attempts after the first plausible one are still judged
// so ledgers are complete.
PatchSetResult evaluate_patch_set(const Benchmark& benchmark, const BugInstance& instance,
                                  const std::vector<PatchAttempt>& attempts,
                                  const std::filesystem::path& work_root, int budget = 10,
                                  const JudgeOptions& options = {});

struct LintIssue {
  std::string id;
  std::string detail;
};

struct LintReport {
  int checked = 0;
  std::vector<LintIssue> issues;
  bool ok() const { return issues.empty(); }
};

// Dynamic corpus check over every bug and registered variant: resubmitting
// the reference fixed function must be plausible and resubmitting the buggy
// function must not be. Violations carry the offending instance id.
LintReport lint_corpus(const Benchmark& benchmark, const std::filesystem::path& scratch,
                       const JudgeOptions& options = {});

}  // namespace layerbench
