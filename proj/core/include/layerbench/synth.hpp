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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "layerbench/corpus.hpp"

namespace layerbench {

class LlmGateway;

// How a synthetic variant relates to its parent: same underlying mistake, or
// merely the same observable misbehavior.
enum class SynthMode { kRootCause, kBehavior };

SynthMode synth_mode_from_string(const std::string& name);  // Error(E_BAD_ARGS)
std::string to_string(SynthMode mode);

enum class SynthStatus { kUnverified, kVerified, kRejected };
std::string to_string(SynthStatus status);

// A model-generated bug/fix/test triple. Sources are complete files destined
// for the standard scaffold; `history` records every generation, verification
// and refinement step for the audit trail.
struct SynthCandidate {
  std::string parent_id;
  SynthMode mode = SynthMode::kRootCause;
  std::string buggy_source;
  std::string fixed_source;
  std::string test_source;
  int iteration = 0;
  SynthStatus status = SynthStatus::kUnverified;
  bool review_flag = false;
  std::vector<std::string> history;
};

struct SynthTriple {
  std::string buggy;
  std::string fixed;
  std::string test;
};

// Splits a generation response at its <<<BUGGY>>>/<<<FIXED>>>/<<<TEST>>>
// markers. Missing, reordered or empty sections yield nullopt.
std::optional<SynthTriple> parse_synth_triple(const std::string& text);

// Extracts the single <<<SOURCE>>> section of a refinement response.
std::optional<std::string> parse_refined_source(const std::string& text);

// The minimal project layout every candidate is verified in and shipped as:
// one source file plus one test file, with fixed build and test commands.
struct SynthScaffold {
  std::string source_file = "src.cpp";  // path inside the checkout
  std::string test_file = "test.cpp";   // path inside tests/
  std::string build_cmd = "c++ -std=c++17 -O0 -o check src.cpp tests/test.cpp";
  std::string test_cmd = "./check";
  std::string trigger_test = "t_synth";
  double timeout_s = 60.0;
};

struct SynthOptions {
  int candidates_per_bug = 5;
  int max_refine_iters = 3;
  SynthScaffold scaffold;
  SubjectProfile profile = default_cfamily_profile();  // for textual comparisons
  std::filesystem::path scratch_dir;  // empty: a fresh directory under /tmp
  // Failing-run context handed to the prompts; defaults to a summary built
  // from the bug's trigger tests.
  std::function<std::string(const BugInstance&)> failing_output;
};

// Asks the model for `n` fresh triples. Root-cause mode first requests an
// analysis of the parent defect and conditions every triple on it; behavior
// mode conditions each triple on the fixed function and the observed failure.
// Triples identical to the parent's buggy function (modulo comments and
// whitespace) are discarded and re-requested once; responses that stay
// malformed after two re-asks reject the slot. Always returns `n` entries.
std::vector<SynthCandidate> synthesize_variants(const BugInstance& bug, SynthMode mode, int n,
                                                LlmGateway& gateway,
                                                const SynthOptions& options = {});

enum class VerifyStatus { kOk, kCompileFail, kTestNotFailingOnBuggy, kTestFailingOnFixed };
std::string to_string(VerifyStatus status);

// Which of the three sources a failed verification implicates, and therefore
// which one refinement regenerates.
enum class VerifyPart { kBuggy, kFixed, kTest };

struct VerifyOutcome {
  VerifyStatus status = VerifyStatus::kOk;
  VerifyPart part = VerifyPart::kBuggy;
  std::string log;

  bool ok() const { return status == VerifyStatus::kOk; }
};

// Materializes the candidate in the scaffold under `scratch` and checks the
// contract: both versions compile, the test fails on the buggy version and
// passes on the fixed one. Build or test timeouts surface as compile_fail
// with a timeout note in the log.
VerifyOutcome verify_candidate(const SynthCandidate& candidate, const SynthScaffold& scaffold,
                               const std::filesystem::path& scratch);

// Regenerates only the part implicated by `outcome`, with the log in
// context, bumping `iteration` and flagging the candidate for review. A
// candidate whose refinement budget is exhausted (or whose refinements stay
// malformed) comes back rejected.
SynthCandidate refine_candidate(SynthCandidate candidate, const VerifyOutcome& outcome,
                                LlmGateway& gateway, int max_refine_iters = 3);

struct SynthYield {
  std::string bug_id;
  int requested = 0;
  int verified = 0;
  int rejected = 0;
};

struct SynthReport {
  std::vector<SynthYield> yields;
  std::vector<std::string> uncovered;  // bugs with zero verified candidates
  std::vector<std::string> errors;     // per-bug registration failures
  int registered = 0;                  // variants persisted across all bugs
};

// Runs generate -> verify -> refine for every bug and registers the verified
// candidates (at most 5 per bug) as an understand-layer variant set. Bugs
// yielding nothing are reported as uncovered rather than papered over.
SynthReport build_understand_layer(Benchmark& benchmark, SynthMode mode, LlmGateway& gateway,
                                   const SynthOptions& options = {});

}  // namespace layerbench
