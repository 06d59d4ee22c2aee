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

#include "layerbench/harness.hpp"
#include "layerbench/stats.hpp"

namespace layerbench {

// One loaded runs/<run_id>/ directory: its metadata plus the full ledger.
struct RunData {
  std::string run_id;
  std::string adapter;
  std::string corpus_name;
  std::string corpus_digest;
  std::vector<LedgerEntry> entries;
};

// Reads run.json and ledger.jsonl. Error(E_RUN_NOT_FOUND) when either is
// missing.
RunData load_run(const std::filesystem::path& run_dir);

// Per-metric aggregate for one evaluation configuration.
struct MetricReport {
  LayerReport layer_report;                 // percent + FIX distribution
  std::vector<std::string> bug_ids;         // row order of the solve matrix
  std::vector<bool> bug_solved;             // layer-semantics verdict per bug
};

// One (adapter, layer, scheme, targets) cell of the evaluation grid.
struct ConfigReport {
  std::string config_id;  // "<producer>/<layer>/<scheme>[-<targets>]"
  std::string producer;
  LayerTag layer = LayerTag::kRemember;
  std::string scheme;
  std::string targets;
  int total_bugs = 0;
  std::map<std::string, MetricReport> metrics;  // keys "pp", "sye", "em"
};

// A layered configuration compared against the same adapter's original-bug
// baseline: relative change plus a paired McNemar test per metric.
struct DeltaReport {
  std::string producer;
  std::string base_config;
  std::string other_config;
  std::string metric;
  double base_percent = 0.0;
  double other_percent = 0.0;
  DeltaCell delta;
  McNemarResult test;
  bool significant = false;
  int paired_bugs = 0;
};

struct ReportBundle {
  std::vector<RunData> runs;  // entries cleared, metadata kept
  std::vector<ConfigReport> configs;
  std::vector<DeltaReport> deltas;
  double alpha = 0.05;
};

struct ReportRequest {
  std::vector<std::filesystem::path> run_dirs;
  double alpha = 0.05;
  // When set, every instance of every layer seen in the ledgers must have a
  // variant record per adapter; otherwise Error(E_LEDGER_INCOMPLETE) listing
  // the missing (bug, variant) pairs.
  const Benchmark* corpus = nullptr;
};

// Recomputes every number from the ledgers via the stats module. Duplicate
// (producer, variant) records beyond the first are ignored so overlapping
// resumed runs stay consistent.
ReportBundle build_report(const ReportRequest& request);

enum class ReportFormat { kMarkdown, kCsv, kJson };

struct ReportFiles {
  std::filesystem::path markdown;
  std::filesystem::path csv;
  std::filesystem::path json;
};

// Renders report.md / report.csv / report.json into out_dir. Emission is
// deterministic: identical ledgers yield byte-identical files.
ReportFiles emit_report(const ReportRequest& request,
                        const std::filesystem::path& out_dir,
                        const std::vector<ReportFormat>& formats = {
                            ReportFormat::kMarkdown, ReportFormat::kCsv,
                            ReportFormat::kJson});

}  // namespace layerbench
