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
#include <map>
#include <string>
#include <vector>

#include "layerbench/corpus.hpp"

namespace layerbench {

class LlmGateway;

// One code-search hit: a function in a mirrored third-party repo that
// resembles a parent bug's function. `exists_verified` is set only after the
// repo, file and function have been located on disk.
struct CloneCandidate {
  std::string parent_id;
  std::string repo;
  std::filesystem::path path;  // file path inside the repo mirror
  std::string function_name;
  std::string snippet;
  bool exists_verified = false;
  // Host-project commands, required in every ingestion record because host
  // build systems are not normalized.
  std::string build_cmd;
  std::string test_cmd;
};

struct IngestReport {
  std::vector<CloneCandidate> candidates;  // verified, (repo, path) order, ≤5 per parent
  std::vector<std::string> dropped;        // one reason line per dropped record
  std::map<std::string, int> per_parent;   // surviving candidates per parent id
};

// Reads a JSONL search export ({parent_id, repo, path, function, snippet,
// build_cmd, test_cmd} per line) and keeps only records whose repo, file and
// function actually exist under <workspace>/mirrors/. Nothing per-record is
// fatal; unlocatable or malformed records are dropped with a logged reason.
IngestReport ingest_clone_candidates(const std::filesystem::path& search_export,
                                     const std::filesystem::path& workspace,
                                     const SubjectProfile& profile);

enum class InjectStatus { kUnverified, kVerified, kRejected };
std::string to_string(InjectStatus status);

// A defect injected into a clone candidate's host project. The instance
// fields mirror a corpus bug; `injected_file_text` is the host file with the
// defect and `test_source` the generated regression test.
struct InjectedVariant {
  BugInstance instance;
  CloneCandidate clone_origin;
  int refine_iterations = 0;
  InjectStatus status = InjectStatus::kUnverified;
  std::string injected_file_text;
  std::string test_source;
  std::filesystem::path test_file;  // relative to the host root
  // Extra harness files when the host had no test tree (the minimal runner).
  std::map<std::filesystem::path, std::string> scaffold_files;
  std::string rejection_reason;
  std::vector<std::string> history;
};

// Asks the model to reproduce the parent's defect pattern inside the
// candidate's function, using the parent buggy/fixed pair as the exemplar.
// Responses that change bytes outside the target function are rejected with
// diff evidence; an unchanged file is rejected as introducing no defect;
// malformed output is re-asked twice before rejection.
InjectedVariant inject_bug(const CloneCandidate& candidate, const BugInstance& parent,
                           LlmGateway& gateway, const std::filesystem::path& workspace,
                           const SubjectProfile& profile);

// Generates the regression test for an injected defect and decides where it
// lives: beside the host's existing tests, or in a fresh minimal tests/
// directory when the host has none. Malformed output is re-asked twice.
void generate_tests(InjectedVariant& variant, const BugInstance& parent,
                    LlmGateway& gateway, const std::filesystem::path& workspace,
                    const SubjectProfile& profile);

struct InjectVerifyOptions {
  int max_iters = 3;
  double timeout_s = 120.0;
  std::filesystem::path scratch_dir;  // empty: a fresh directory under /tmp
};

// Build-and-test loop over private checkout copies: the injected host must
// compile, the test must fail on it and pass on the pristine host. Each
// violation feeds its log back to the model to regenerate the offending
// part, at most max_iters times; the variant comes back verified or
// rejected with the final logs.
void verify_refine(InjectedVariant& variant, LlmGateway& gateway,
                   const std::filesystem::path& workspace, const SubjectProfile& profile,
                   const InjectVerifyOptions& options = {});

struct InjectYield {
  std::string parent_id;
  int candidates = 0;
  int verified = 0;
  int rejected = 0;
};

struct InjectReport {
  IngestReport ingest;
  std::vector<InjectYield> yields;
  std::vector<std::string> uncovered;  // parents with zero verified variants
  std::vector<std::string> errors;     // per-parent registration failures
  int registered = 0;
};

struct InjectOptions {
  InjectVerifyOptions verify;
};

// Full analyze-layer pipeline: ingest the search export, inject the parent
// defect into every surviving candidate, generate tests, verify-refine, and
// register the verified variants per parent. Every ingested candidate ends
// verified or rejected, and parents without a single verified variant are
// reported uncovered.
InjectReport build_analyze_layer(Benchmark& benchmark,
                                 const std::filesystem::path& search_export,
                                 const std::filesystem::path& workspace,
                                 LlmGateway& gateway, const InjectOptions& options = {});

}  // namespace layerbench
