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

#include "layerbench/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <thread>

#include "layerbench/error.hpp"
#include "layerbench/exec.hpp"
#include "layerbench/fs_util.hpp"

namespace layerbench {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string substitute_slot(std::string text, const std::string& slot,
                            const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(slot, pos)) != std::string::npos) {
    text.replace(pos, slot.size(), value);
    pos += value.size();
  }
  return text;
}

json entry_to_json(const LedgerEntry& entry) {
  json doc;
  doc["kind"] = entry.kind;
  doc["bug_id"] = entry.bug_id;
  doc["variant_id"] = entry.variant_id;
  doc["layer"] = to_string(entry.layer);
  doc["scheme"] = entry.scheme;
  doc["targets"] = entry.targets;
  doc["producer"] = entry.producer;
  doc["pp"] = entry.pp;
  doc["sye"] = entry.sye;
  doc["em"] = entry.em;
  doc["detail"] = entry.detail;
  if (entry.kind == "patch") {
    doc["attempt"] = entry.attempt;
    doc["compiled"] = entry.compiled;
  } else {
    doc["attempts"] = entry.attempts;
    doc["adapter_failed"] = entry.adapter_failed;
    doc["duration_s"] = entry.duration_s;
  }
  return doc;
}

}  // namespace

void validate_adapter(const SueAdapter& adapter) {
  if (adapter.attempt_budget < 1) {
    throw Error(kErrBadArgs,
                "adapter '" + adapter.id + "': attempt budget must be at least 1");
  }
  if (adapter.invoke_cmd.find("{bundle}") == std::string::npos ||
      adapter.invoke_cmd.find("{out}") == std::string::npos) {
    throw Error(kErrBadArgs, "adapter '" + adapter.id +
                                 "': invoke command needs {bundle} and {out} slots");
  }
}

SueRun run_sue(const SueAdapter& adapter, const fs::path& bundle_dir,
               const fs::path& out_dir) {
  validate_adapter(adapter);
  fs::create_directories(out_dir);

  std::string cmd = substitute_slot(adapter.invoke_cmd, "{bundle}", bundle_dir.string());
  cmd = substitute_slot(cmd, "{out}", out_dir.string());

  SueRun run;
  ExecRequest request{cmd, out_dir, adapter.timeout_s};
  const ExecResult result = execute_build_test(request);
  if (result.spawn_failed) {
    run.failed = true;
    run.note = "adapter failed to spawn";
    return run;
  }
  if (result.timed_out) {
    run.failed = true;
    run.note = "adapter timed out";
    return run;
  }
  if (result.exit_code != 0) {
    run.failed = true;
    run.note = "adapter exited with code " + std::to_string(result.exit_code);
    return run;
  }

  const fs::path patches_path = out_dir / "patches.jsonl";
  if (!fs::exists(patches_path)) {
    run.note = "adapter produced no patches.jsonl";
    return run;
  }

  std::istringstream stream(read_file(patches_path));
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::optional<PatchAttempt> attempt = parse_patch_attempt(line);
    if (!attempt) {
      run.skipped.push_back("line " + std::to_string(line_no) + ": malformed patch line");
      continue;
    }
    run.patches.push_back(std::move(*attempt));
  }
  if (static_cast<int>(run.patches.size()) > adapter.attempt_budget) {
    run.dropped = static_cast<int>(run.patches.size()) - adapter.attempt_budget;
    run.patches.resize(static_cast<std::size_t>(adapter.attempt_budget));
    run.note = std::to_string(run.dropped) + " attempt(s) beyond the budget dropped";
  }
  return run;
}

std::string to_jsonl(const LedgerEntry& entry) {
  return entry_to_json(entry).dump() + "\n";
}

LedgerEntry ledger_entry_from_line(const std::string& line) {
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(kErrLedgerCorrupt, std::string("unparsable ledger line: ") + e.what());
  }
  try {
    LedgerEntry entry;
    entry.kind = doc.at("kind").get<std::string>();
    entry.bug_id = doc.at("bug_id").get<std::string>();
    entry.variant_id = doc.at("variant_id").get<std::string>();
    entry.layer = layer_from_string(doc.at("layer").get<std::string>());
    entry.scheme = doc.at("scheme").get<std::string>();
    entry.targets = doc.at("targets").get<std::string>();
    entry.producer = doc.at("producer").get<std::string>();
    entry.pp = doc.at("pp").get<bool>();
    entry.sye = doc.at("sye").get<bool>();
    entry.em = doc.at("em").get<bool>();
    entry.detail = doc.at("detail").get<std::string>();
    if (entry.kind == "patch") {
      entry.attempt = doc.at("attempt").get<int>();
      entry.compiled = doc.at("compiled").get<bool>();
    } else if (entry.kind == "variant") {
      entry.attempts = doc.at("attempts").get<int>();
      entry.adapter_failed = doc.at("adapter_failed").get<bool>();
      entry.duration_s = doc.at("duration_s").get<double>();
    } else {
      throw Error(kErrLedgerCorrupt, "unknown ledger record kind '" + entry.kind + "'");
    }
    return entry;
  } catch (const json::exception& e) {
    throw Error(kErrLedgerCorrupt, std::string("ledger record missing field: ") + e.what());
  }
}

std::vector<LedgerEntry> read_ledger(const fs::path& ledger_path) {
  if (!fs::exists(ledger_path)) {
    throw Error(kErrRunNotFound, "no ledger at " + ledger_path.string());
  }
  std::vector<LedgerEntry> entries;
  std::istringstream stream(read_file(ledger_path));
  std::string line;
  while (std::getline(stream, line)) {
    if (line.empty()) continue;
    entries.push_back(ledger_entry_from_line(line));
  }
  return entries;
}

namespace {

struct Job {
  const BugInstance* instance = nullptr;
  std::string bug_id;
  std::string scheme;
  std::string targets;
};

struct JobOutcome {
  std::vector<LedgerEntry> entries;
  std::optional<CampaignFailure> failure;
};

// Canonical evaluation order; also the commit order of ledger records.
std::vector<Job> plan_jobs(const Benchmark& benchmark,
                           const std::vector<LayerTag>& layers) {
  const std::set<LayerTag> requested(layers.begin(), layers.end());
  if (requested.empty()) {
    throw Error(kErrBadArgs, "no layers requested");
  }
  std::vector<Job> jobs;
  for (LayerTag layer : {LayerTag::kRemember, LayerTag::kUnderstand, LayerTag::kApply,
                         LayerTag::kAnalyze}) {
    if (!requested.count(layer)) continue;
    std::size_t before = jobs.size();
    if (layer == LayerTag::kRemember) {
      for (const BugInstance& bug : benchmark.bugs) {
        jobs.push_back({&bug, bug.id, "original", ""});
      }
    } else {
      for (const auto& [key, set] : benchmark.variant_sets) {
        if (key.first != layer) continue;
        for (const Variant& variant : set.variants) {
          jobs.push_back({&variant.instance, set.parent_id, variant.transform.scheme,
                          variant.transform.targets});
        }
      }
    }
    if (jobs.size() == before) {
      throw Error(kErrBadArgs,
                  "layer '" + to_string(layer) + "' has no registered instances");
    }
  }
  return jobs;
}

// Reads an existing ledger for resumption. A torn final line (no trailing
// newline, kill mid-append) is discarded; corruption elsewhere is an error.
std::vector<LedgerEntry> load_resumable_ledger(const fs::path& ledger_path) {
  if (!fs::exists(ledger_path)) return {};
  std::string text = read_file(ledger_path);
  std::vector<LedgerEntry> entries;
  std::size_t consumed = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) break;  // torn tail, drop it
    const std::string line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (!line.empty()) entries.push_back(ledger_entry_from_line(line));
    consumed = pos;
  }
  if (consumed != text.size()) {
    write_file(ledger_path, text.substr(0, consumed));
  }
  return entries;
}

JobOutcome execute_job(const Benchmark& benchmark, const Job& job,
                       const SueAdapter& adapter, const CampaignConfig& config,
                       const fs::path& workdir) {
  const auto started = std::chrono::steady_clock::now();
  JobOutcome outcome;
  try {
    fs::remove_all(workdir);
    const TaskBundle bundle = materialize_task_bundle(
        *job.instance, workdir / "bundle", {config.judge_timeout_s});
    const SueRun sue = run_sue(adapter, bundle.workdir, workdir / "out");
    const PatchSetResult set =
        evaluate_patch_set(benchmark, *job.instance, sue.patches, workdir / "judge",
                           adapter.attempt_budget, {config.judge_timeout_s});

    for (const AttemptJudgment& judged : set.attempts) {
      LedgerEntry entry;
      entry.kind = "patch";
      entry.bug_id = job.bug_id;
      entry.variant_id = job.instance->id;
      entry.layer = job.instance->layer;
      entry.scheme = job.scheme;
      entry.targets = job.targets;
      entry.producer = adapter.id;
      entry.attempt = judged.attempt.attempt;
      entry.compiled = judged.judgment.compiled;
      entry.pp = judged.judgment.plausible;
      entry.sye = judged.judgment.syntactic;
      entry.em = judged.judgment.exact;
      entry.detail = judged.judgment.detail;
      outcome.entries.push_back(std::move(entry));
    }

    LedgerEntry summary;
    summary.kind = "variant";
    summary.bug_id = job.bug_id;
    summary.variant_id = job.instance->id;
    summary.layer = job.instance->layer;
    summary.scheme = job.scheme;
    summary.targets = job.targets;
    summary.producer = adapter.id;
    summary.pp = set.plausible;
    summary.sye = set.syntactic;
    summary.em = set.exact;
    summary.attempts = static_cast<int>(set.attempts.size());
    summary.adapter_failed = sue.failed;
    summary.detail = sue.note;
    for (const std::string& skipped : sue.skipped) {
      summary.detail += summary.detail.empty() ? skipped : "; " + skipped;
    }
    summary.duration_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
            .count();
    outcome.entries.push_back(std::move(summary));
  } catch (const std::exception& e) {
    outcome.entries.clear();  // failed jobs are retried, never half-ledgered
    outcome.failure = CampaignFailure{job.bug_id, job.instance->id, e.what()};
  }
  std::error_code ec;
  fs::remove_all(workdir, ec);
  return outcome;
}

}  // namespace

CampaignResult run_campaign(const Benchmark& benchmark,
                            const std::vector<LayerTag>& layers,
                            const SueAdapter& adapter, const CampaignConfig& config) {
  validate_adapter(adapter);
  if (config.run_id.empty()) {
    throw Error(kErrBadArgs, "run_id must not be empty");
  }
  if (config.workers < 1) {
    throw Error(kErrBadArgs, "workers must be at least 1");
  }

  CampaignResult result;
  result.run_dir = config.runs_root / config.run_id;
  result.ledger_path = result.run_dir / "ledger.jsonl";
  result.failures_path = result.run_dir / "failures.json";
  fs::create_directories(result.run_dir);

  // Pin the run to its corpus so a resumed ledger cannot silently mix data
  // from two different benchmarks.
  const fs::path run_meta_path = result.run_dir / "run.json";
  json run_meta;
  run_meta["run_id"] = config.run_id;
  run_meta["adapter"] = adapter.id;
  run_meta["attempt_budget"] = adapter.attempt_budget;
  run_meta["corpus_name"] = benchmark.name;
  run_meta["corpus_digest"] = benchmark.corpus_digest();
  {
    json layer_names = json::array();
    for (LayerTag layer : {LayerTag::kRemember, LayerTag::kUnderstand, LayerTag::kApply,
                           LayerTag::kAnalyze}) {
      if (std::count(layers.begin(), layers.end(), layer) > 0) {
        layer_names.push_back(to_string(layer));
      }
    }
    run_meta["layers"] = layer_names;
  }
  if (fs::exists(run_meta_path)) {
    const json previous = json::parse(read_file(run_meta_path));
    if (previous.value("corpus_digest", "") != run_meta["corpus_digest"]) {
      throw Error(kErrConfig, "run '" + config.run_id +
                                  "' was recorded against a different corpus");
    }
  }
  write_file(run_meta_path, run_meta.dump(2) + "\n");

  const std::vector<Job> jobs = plan_jobs(benchmark, layers);
  result.jobs_total = static_cast<int>(jobs.size());

  result.entries = load_resumable_ledger(result.ledger_path);
  std::set<std::string> completed;
  for (const LedgerEntry& entry : result.entries) {
    if (entry.kind == "variant") completed.insert(entry.variant_id);
  }

  std::vector<Job> pending;
  for (const Job& job : jobs) {
    if (completed.count(job.instance->id)) {
      ++result.jobs_skipped;
    } else {
      pending.push_back(job);
    }
  }

  const fs::path scratch =
      config.scratch_dir.empty() ? result.run_dir / "work" : config.scratch_dir;
  std::set<fs::path> workdirs;
  for (const Job& job : pending) {
    if (!workdirs.insert(scratch / job.instance->id).second) {
      throw Error(kErrInternal, "duplicate job workdir for " + job.instance->id);
    }
  }

  std::vector<std::optional<JobOutcome>> outcomes(pending.size());
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::condition_variable ready;

  auto worker = [&] {
    while (true) {
      const std::size_t index = next.fetch_add(1);
      if (index >= pending.size()) return;
      JobOutcome outcome = execute_job(benchmark, pending[index], adapter, config,
                                       scratch / pending[index].instance->id);
      {
        std::lock_guard<std::mutex> lock(mu);
        outcomes[index] = std::move(outcome);
      }
      ready.notify_all();
    }
  };

  const std::size_t width = std::min<std::size_t>(
      static_cast<std::size_t>(config.workers), pending.size());
  std::vector<std::thread> pool;
  pool.reserve(width);
  for (std::size_t i = 0; i < width; ++i) pool.emplace_back(worker);

  // Single committer: append each job's records in plan order, so the ledger
  // bytes do not depend on worker interleaving and a killed run leaves a
  // clean prefix.
  for (std::size_t index = 0; index < pending.size(); ++index) {
    JobOutcome outcome;
    {
      std::unique_lock<std::mutex> lock(mu);
      ready.wait(lock, [&] { return outcomes[index].has_value(); });
      outcome = std::move(*outcomes[index]);
      outcomes[index].reset();
    }
    if (!outcome.entries.empty()) {
      std::ofstream out(result.ledger_path, std::ios::app | std::ios::binary);
      for (const LedgerEntry& entry : outcome.entries) {
        out << to_jsonl(entry);
      }
      out.flush();
      if (!out) {
        throw Error(kErrIo, "cannot append to " + result.ledger_path.string());
      }
    }
    result.entries.insert(result.entries.end(), outcome.entries.begin(),
                          outcome.entries.end());
    if (outcome.failure) result.failures.push_back(*outcome.failure);
    ++result.jobs_run;
  }
  for (std::thread& thread : pool) thread.join();

  json failures = json::array();
  for (const CampaignFailure& failure : result.failures) {
    json doc;
    doc["bug_id"] = failure.bug_id;
    doc["variant_id"] = failure.variant_id;
    doc["error"] = failure.error;
    failures.push_back(doc);
  }
  write_file(result.failures_path, failures.dump(2) + "\n");

  std::error_code ec;
  fs::remove_all(scratch, ec);
  return result;
}

}  // namespace layerbench
