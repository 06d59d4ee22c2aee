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
#include "layerbench/patch_eval.hpp"

namespace layerbench {

// An external repair agent. The harness invokes `invoke_cmd` once per task
// with `{bundle}` replaced by the task bundle directory and `{out}` by a
// private output directory, then reads `{out}/patches.jsonl`.
struct SueAdapter {
  std::string id;
  std::string invoke_cmd;  // must contain both {bundle} and {out}
  int attempt_budget = 10;
  double timeout_s = 600.0;
};

// Error(E_BAD_ARGS) unless the budget is >= 1 and the command template
// carries both substitution slots.
void validate_adapter(const SueAdapter& adapter);

// One adapter invocation: parsed patches plus everything that went wrong.
struct SueRun {
  std::vector<PatchAttempt> patches;
  bool failed = false;  // crash, timeout or spawn failure; patches is empty
  std::string note;     // failure cause or output oddities, "" when clean
  std::vector<std::string> skipped;  // malformed patch lines, with numbers
  int dropped = 0;                   // attempts beyond the budget
};

SueRun run_sue(const SueAdapter& adapter, const std::filesystem::path& bundle_dir,
               const std::filesystem::path& out_dir);

// One line of runs/<run_id>/ledger.jsonl. "patch" records carry the verdict
// of a single judged attempt; one "variant" record per (bug, variant) task
// summarizes the attempt set and marks the task complete for resumption.
struct LedgerEntry {
  std::string kind;  // "patch" | "variant"
  std::string bug_id;
  std::string variant_id;  // equals bug_id for original-layer tasks
  LayerTag layer = LayerTag::kRemember;
  std::string scheme;   // "original" or the transform scheme
  std::string targets;  // transform targets, "" when not applicable
  std::string producer;  // adapter id

  // patch records
  int attempt = 0;
  bool compiled = false;

  // both kinds: per-attempt verdict, or its disjunction over the task
  bool pp = false;
  bool sye = false;
  bool em = false;
  std::string detail;

  // variant records
  int attempts = 0;
  bool adapter_failed = false;
  double duration_s = 0.0;
};

std::string to_jsonl(const LedgerEntry& entry);
LedgerEntry ledger_entry_from_line(const std::string& line);  // E_LEDGER_CORRUPT

// Reads a complete ledger. Errors: E_RUN_NOT_FOUND when the file does not
// exist, E_LEDGER_CORRUPT on an unparsable line.
std::vector<LedgerEntry> read_ledger(const std::filesystem::path& ledger_path);

struct CampaignConfig {
  std::string run_id;               // required; names runs/<run_id>/
  std::filesystem::path runs_root;  // parent of the run directory
  int workers = 1;
  double judge_timeout_s = 120.0;  // build/test limit for bundles and judging
  std::filesystem::path scratch_dir;  // default: <run dir>/work
};

struct CampaignFailure {
  std::string bug_id;
  std::string variant_id;
  std::string error;
};

struct CampaignResult {
  std::filesystem::path run_dir;
  std::filesystem::path ledger_path;
  std::filesystem::path failures_path;
  int jobs_total = 0;
  int jobs_run = 0;
  int jobs_skipped = 0;  // already ledgered before this invocation
  std::vector<CampaignFailure> failures;
  std::vector<LedgerEntry> entries;  // full ledger content after the run
};

// Evaluates `adapter` on every instance of the requested layers: bundle
// materialization, one adapter invocation, patch judging, ledger append.
// Jobs run on a bounded worker pool, each in a private scratch directory;
// records are committed in deterministic job order regardless of worker
// count. Tasks already present in the ledger are skipped, so a killed
// campaign resumes where it stopped. Per-job failures never abort the
// campaign; they are retried on the next invocation and listed in
// runs/<run_id>/failures.json.
CampaignResult run_campaign(const Benchmark& benchmark,
                            const std::vector<LayerTag>& layers,
                            const SueAdapter& adapter, const CampaignConfig& config);

}  // namespace layerbench
