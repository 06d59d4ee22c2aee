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

#include <nlohmann/json.hpp>
#include <regex>
#include <string>
#include <vector>

#include "doctest.h"
#include "layerbench/corpus.hpp"
#include "layerbench/error.hpp"
#include "layerbench/fs_util.hpp"
#include "layerbench/harness.hpp"
#include "test_support.hpp"

using namespace layerbench;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kBuggyFn = "int f() {\n  int value = 1;\n  return value;\n}\n";
const std::string kFixedFn = "int f() {\n  int value = 2;\n  return value;\n}\n";
const char* kTestCmd = "grep -q 'value = 2' src.cpp";

// Shared argument parsing for the scripted adapters.
const char* kAdapterPrologue =
    "while [ $# -gt 0 ]; do\n"
    "  case \"$1\" in\n"
    "    --bundle) BUNDLE=\"$2\"; shift 2;;\n"
    "    --out) OUT=\"$2\"; shift 2;;\n"
    "    *) shift;;\n"
    "  esac\n"
    "done\n";

std::string patch_line_printf(const std::string& replacement_escaped) {
  return "printf '{\"bug_id\":\"%s\",\"variant_id\":\"%s\",\"attempt\":1,"
         "\"file\":\"src.cpp\",\"function_name\":\"f\",\"replacement\":\"" +
         replacement_escaped + "\"}\\n' \"$ID\" \"$ID\"";
}

fs::path write_oracle_adapter(const fs::path& dir) {
  const fs::path script = dir / "oracle.sh";
  write_file(script,
             std::string(kAdapterPrologue) +
                 "ID=$(sed -n 's/.*\"id\": \"\\([^\"]*\\)\".*/\\1/p' "
                 "\"$BUNDLE/metadata.json\" | head -1)\n" +
                 patch_line_printf("int f() {\\\\n  int value = 2;\\\\n  return value;"
                                   "\\\\n}\\\\n") +
                 " > \"$OUT/patches.jsonl\"\n");
  return script;
}

fs::path write_never_patch_adapter(const fs::path& dir) {
  const fs::path script = dir / "never.sh";
  write_file(script, std::string(kAdapterPrologue) + ": > \"$OUT/patches.jsonl\"\n");
  return script;
}

SueAdapter adapter_for(const std::string& id, const fs::path& script) {
  SueAdapter adapter;
  adapter.id = id;
  adapter.invoke_cmd = "sh " + script.string() + " --bundle {bundle} --out {out}";
  adapter.timeout_s = 30.0;
  return adapter;
}

void write_bug_dirs(const fs::path& root, const std::string& id) {
  testing::write_tree(root, {
      {"bugs/" + id + "/buggy/src.cpp", kBuggyFn},
      {"bugs/" + id + "/fixed/src.cpp", kFixedFn},
  });
}

// Two healthy bugs; optionally a third whose buggy checkout passes its
// tests, which bundle materialization must refuse.
void make_corpus(const fs::path& root, bool with_broken_bug = false) {
  json manifest;
  manifest["name"] = "harnessfix";
  manifest["subject_language"] = "cpp";
  manifest["bugs"] = json::array();
  auto add_bug = [&manifest](const std::string& id, const std::string& test_cmd) {
    json bug;
    bug["id"] = id;
    bug["project"] = "cal";
    bug["buggy_file"] = "src.cpp";
    bug["function_name"] = "f";
    bug["build_cmd"] = "true";
    bug["test_cmd"] = test_cmd;
    bug["trigger_tests"] = json::array({"t_value"});
    bug["layer"] = "remember";
    manifest["bugs"].push_back(bug);
  };
  add_bug("Cal-1", kTestCmd);
  add_bug("Cal-2", kTestCmd);
  write_bug_dirs(root, "Cal-1");
  write_bug_dirs(root, "Cal-2");
  if (with_broken_bug) {
    add_bug("Bad-9", "true");  // passes on the buggy checkout: invalid task
    write_bug_dirs(root, "Bad-9");
  }
  write_file(root / "manifest.json", manifest.dump(2) + "\n");
}

// Registers `count` apply-layer variants of `parent` with the same content
// as the parent, so the oracle adapter solves them too.
void add_apply_variants(Benchmark& bench, const std::string& parent, int count,
                        const fs::path& staging_root) {
  const BugInstance* parent_bug = bench.find_bug(parent);
  REQUIRE(parent_bug != nullptr);
  VariantSet set;
  set.parent_id = parent;
  set.layer = LayerTag::kApply;
  for (int i = 0; i < count; ++i) {
    const fs::path staging = staging_root / (parent + "-s" + std::to_string(i));
    testing::write_tree(staging, {
        {"buggy/src.cpp", kBuggyFn},
        {"fixed/src.cpp", kFixedFn},
    });
    Variant variant;
    variant.instance = *parent_bug;
    variant.instance.root = staging;
    variant.transform.scheme = "hash";
    variant.transform.targets = i == 0 ? "vars" : "funcs";
    set.variants.push_back(std::move(variant));
  }
  register_variant_set(bench, std::move(set));
}

std::string normalize_durations(std::string text) {
  static const std::regex duration("\"duration_s\":[0-9.eE+-]+");
  return std::regex_replace(text, duration, "\"duration_s\":0");
}

}  // namespace

TEST_CASE("adapter validation rejects bad budgets and missing slots") {
  SueAdapter adapter;
  adapter.id = "x";
  adapter.invoke_cmd = "run --bundle {bundle} --out {out}";
  adapter.attempt_budget = 0;
  CHECK_THROWS_AS(validate_adapter(adapter), Error);
  adapter.attempt_budget = 1;
  CHECK_NOTHROW(validate_adapter(adapter));
  adapter.invoke_cmd = "run --bundle {bundle}";
  CHECK_THROWS_AS(validate_adapter(adapter), Error);
}

TEST_CASE("run_sue parses, trims and reports adapter output") {
  testing::TempDir tmp;
  const fs::path bundle = tmp.path() / "bundle";
  fs::create_directories(bundle);
  write_file(bundle / "metadata.json", "{\n  \"id\": \"Cal-1\"\n}\n");

  SUBCASE("a clean adapter yields its patch") {
    const SueAdapter adapter = adapter_for("oracle", write_oracle_adapter(tmp.path()));
    const SueRun run = run_sue(adapter, bundle, tmp.path() / "out1");
    CHECK_FALSE(run.failed);
    REQUIRE(run.patches.size() == 1);
    CHECK(run.patches[0].bug_id == "Cal-1");
    CHECK(run.patches[0].replacement.find("value = 2") != std::string::npos);
  }

  SUBCASE("a crash produces a failure note and no patches") {
    const fs::path script = tmp.path() / "crash.sh";
    write_file(script, "exit 3\n");
    const SueRun run = run_sue(adapter_for("crash", script), bundle, tmp.path() / "out2");
    CHECK(run.failed);
    CHECK(run.patches.empty());
    CHECK(run.note == "adapter exited with code 3");
  }

  SUBCASE("a hung adapter is killed and reported") {
    const fs::path script = tmp.path() / "hang.sh";
    write_file(script, "sleep 5\n");
    SueAdapter adapter = adapter_for("hang", script);
    adapter.timeout_s = 0.2;
    const SueRun run = run_sue(adapter, bundle, tmp.path() / "out3");
    CHECK(run.failed);
    CHECK(run.note == "adapter timed out");
  }

  SUBCASE("an adapter that writes nothing is noted but not failed") {
    const fs::path script = tmp.path() / "silent.sh";
    write_file(script, "true\n");
    const SueRun run = run_sue(adapter_for("silent", script), bundle, tmp.path() / "out4");
    CHECK_FALSE(run.failed);
    CHECK(run.patches.empty());
    CHECK(run.note == "adapter produced no patches.jsonl");
  }

  SUBCASE("excess attempts are dropped and malformed lines skipped") {
    const fs::path script = tmp.path() / "chatty.sh";
    write_file(script, std::string(kAdapterPrologue) +
                           "ID=Cal-1\n"
                           "echo 'not a patch' > \"$OUT/patches.jsonl\"\n"
                           "for i in 1 2 3 4 5 6 7 8 9 10 11 12; do\n" +
                           "  " + patch_line_printf("int f() { return $i; }") +
                           " >> \"$OUT/patches.jsonl\"\n"
                           "done\n");
    SueAdapter adapter = adapter_for("chatty", script);
    adapter.attempt_budget = 10;
    const SueRun run = run_sue(adapter, bundle, tmp.path() / "out5");
    CHECK_FALSE(run.failed);
    CHECK(run.patches.size() == 10);
    CHECK(run.dropped == 2);
    CHECK(run.note.find("beyond the budget") != std::string::npos);
    REQUIRE(run.skipped.size() == 1);
    CHECK(run.skipped[0].find("line 1") != std::string::npos);
  }
}

TEST_CASE("ledger entries survive a serialization round trip") {
  LedgerEntry patch;
  patch.kind = "patch";
  patch.bug_id = "Cal-1";
  patch.variant_id = "Cal-1-v2";
  patch.layer = LayerTag::kApply;
  patch.scheme = "hash";
  patch.targets = "both";
  patch.producer = "oracle";
  patch.attempt = 3;
  patch.compiled = true;
  patch.pp = true;
  patch.sye = false;
  patch.em = false;
  patch.detail = "ok";

  const LedgerEntry back = ledger_entry_from_line(to_jsonl(patch));
  CHECK(back.kind == "patch");
  CHECK(back.variant_id == "Cal-1-v2");
  CHECK(back.layer == LayerTag::kApply);
  CHECK(back.targets == "both");
  CHECK(back.attempt == 3);
  CHECK(back.compiled);
  CHECK(back.pp);
  CHECK_FALSE(back.sye);

  LedgerEntry summary;
  summary.kind = "variant";
  summary.bug_id = "Cal-1";
  summary.variant_id = "Cal-1";
  summary.scheme = "original";
  summary.producer = "oracle";
  summary.attempts = 4;
  summary.adapter_failed = true;
  summary.duration_s = 1.5;
  const LedgerEntry round = ledger_entry_from_line(to_jsonl(summary));
  CHECK(round.attempts == 4);
  CHECK(round.adapter_failed);
  CHECK(round.duration_s == doctest::Approx(1.5));

  CHECK_THROWS_WITH_AS(ledger_entry_from_line("{broken"),
                       doctest::Contains("E_LEDGER_CORRUPT"), Error);
  CHECK_THROWS_WITH_AS(ledger_entry_from_line("{\"kind\":\"weird\"}"),
                       doctest::Contains("E_LEDGER_CORRUPT"), Error);
  CHECK_THROWS_WITH_AS(read_ledger("/nonexistent/ledger.jsonl"),
                       doctest::Contains("E_RUN_NOT_FOUND"), Error);
}

TEST_CASE("a campaign judges every instance and resumes from its ledger") {
  testing::TempDir tmp;
  const fs::path corpus = tmp.path() / "corpus";
  make_corpus(corpus);
  Benchmark bench = load_manifest(corpus);
  add_apply_variants(bench, "Cal-1", 2, tmp.path() / "staging");
  add_apply_variants(bench, "Cal-2", 1, tmp.path() / "staging");

  const SueAdapter oracle = adapter_for("oracle", write_oracle_adapter(tmp.path()));
  CampaignConfig config;
  config.run_id = "r1";
  config.runs_root = tmp.path() / "runs";
  config.workers = 2;

  const CampaignResult result =
      run_campaign(bench, {LayerTag::kRemember, LayerTag::kApply}, oracle, config);

  CHECK(result.jobs_total == 5);
  CHECK(result.jobs_run == 5);
  CHECK(result.jobs_skipped == 0);
  CHECK(result.failures.empty());
  CHECK(read_file(result.failures_path) == "[]\n");

  int variant_records = 0;
  int patch_records = 0;
  for (const LedgerEntry& entry : result.entries) {
    if (entry.kind == "variant") {
      ++variant_records;
      CHECK(entry.producer == "oracle");
      CHECK(entry.pp);
      CHECK(entry.sye);
      CHECK(entry.em);
      CHECK(entry.attempts == 1);
      CHECK_FALSE(entry.adapter_failed);
    } else {
      ++patch_records;
      CHECK(entry.compiled);
    }
  }
  CHECK(variant_records == 5);
  CHECK(patch_records == 5);

  // Commit order is plan order: originals first, then apply variants.
  CHECK(result.entries[1].kind == "variant");
  CHECK(result.entries[1].variant_id == "Cal-1");
  CHECK(result.entries[1].scheme == "original");
  CHECK(result.entries.back().layer == LayerTag::kApply);
  CHECK(result.entries.back().scheme == "hash");

  const json run_meta = json::parse(read_file(result.run_dir / "run.json"));
  CHECK(run_meta.at("corpus_digest").get<std::string>() == bench.corpus_digest());
  CHECK(run_meta.at("adapter").get<std::string>() == "oracle");

  // A second invocation is a no-op: everything is already ledgered.
  const std::string first_ledger = read_file(result.ledger_path);
  const CampaignResult resumed =
      run_campaign(bench, {LayerTag::kRemember, LayerTag::kApply}, oracle, config);
  CHECK(resumed.jobs_skipped == 5);
  CHECK(resumed.jobs_run == 0);
  CHECK(read_file(resumed.ledger_path) == first_ledger);

  // A killed run (clean prefix plus a torn tail) resumes to identical
  // content, modulo job wall times.
  CampaignConfig replay = config;
  replay.run_id = "r1-replay";
  fs::create_directories(config.runs_root / replay.run_id);
  std::size_t cut = first_ledger.find("\"kind\":\"variant\"");
  cut = first_ledger.find('\n', cut) + 1;
  write_file(config.runs_root / replay.run_id / "ledger.jsonl",
             first_ledger.substr(0, cut) + "{\"kind\":\"pat");
  const CampaignResult recovered =
      run_campaign(bench, {LayerTag::kRemember, LayerTag::kApply}, oracle, replay);
  CHECK(recovered.jobs_skipped == 1);
  CHECK(recovered.jobs_run == 4);
  CHECK(normalize_durations(read_file(recovered.ledger_path)) ==
        normalize_durations(first_ledger));

  // Worker count does not change the ledger bytes.
  CampaignConfig wide = config;
  wide.run_id = "r1-wide";
  wide.workers = 3;
  const CampaignResult parallel =
      run_campaign(bench, {LayerTag::kRemember, LayerTag::kApply}, oracle, wide);
  CHECK(normalize_durations(read_file(parallel.ledger_path)) ==
        normalize_durations(first_ledger));
}

TEST_CASE("a never-patch campaign ledgers zero attempts everywhere") {
  testing::TempDir tmp;
  const fs::path corpus = tmp.path() / "corpus";
  make_corpus(corpus);
  Benchmark bench = load_manifest(corpus);

  const SueAdapter never = adapter_for("never", write_never_patch_adapter(tmp.path()));
  CampaignConfig config;
  config.run_id = "r2";
  config.runs_root = tmp.path() / "runs";

  const CampaignResult result = run_campaign(bench, {LayerTag::kRemember}, never, config);
  CHECK(result.jobs_run == 2);
  REQUIRE(result.entries.size() == 2);  // no patch records at all
  for (const LedgerEntry& entry : result.entries) {
    CHECK(entry.kind == "variant");
    CHECK_FALSE(entry.pp);
    CHECK(entry.attempts == 0);
  }
}

TEST_CASE("job failures are isolated, manifested and retried") {
  testing::TempDir tmp;
  const fs::path corpus = tmp.path() / "corpus";
  make_corpus(corpus, /*with_broken_bug=*/true);
  Benchmark bench = load_manifest(corpus);

  const SueAdapter oracle = adapter_for("oracle", write_oracle_adapter(tmp.path()));
  CampaignConfig config;
  config.run_id = "r3";
  config.runs_root = tmp.path() / "runs";

  const CampaignResult result = run_campaign(bench, {LayerTag::kRemember}, oracle, config);
  CHECK(result.jobs_total == 3);
  CHECK(result.jobs_run == 3);
  REQUIRE(result.failures.size() == 1);
  CHECK(result.failures[0].bug_id == "Bad-9");
  CHECK(result.failures[0].error.find("passes its tests") != std::string::npos);
  const json manifest = json::parse(read_file(result.failures_path));
  REQUIRE(manifest.size() == 1);
  CHECK(manifest[0].at("variant_id").get<std::string>() == "Bad-9");

  // The failed job is not ledgered, so a resume retries exactly it.
  const CampaignResult retry = run_campaign(bench, {LayerTag::kRemember}, oracle, config);
  CHECK(retry.jobs_skipped == 2);
  CHECK(retry.jobs_run == 1);
  REQUIRE(retry.failures.size() == 1);
  CHECK(retry.failures[0].bug_id == "Bad-9");
}

TEST_CASE("campaign configuration is validated") {
  testing::TempDir tmp;
  const fs::path corpus = tmp.path() / "corpus";
  make_corpus(corpus);
  Benchmark bench = load_manifest(corpus);
  const SueAdapter oracle = adapter_for("oracle", write_oracle_adapter(tmp.path()));

  CampaignConfig config;
  config.runs_root = tmp.path() / "runs";
  config.run_id = "";
  CHECK_THROWS_AS(run_campaign(bench, {LayerTag::kRemember}, oracle, config), Error);

  config.run_id = "ok";
  config.workers = 0;
  CHECK_THROWS_AS(run_campaign(bench, {LayerTag::kRemember}, oracle, config), Error);

  config.workers = 1;
  CHECK_THROWS_AS(run_campaign(bench, {}, oracle, config), Error);
  CHECK_THROWS_WITH_AS(run_campaign(bench, {LayerTag::kUnderstand}, oracle, config),
                       doctest::Contains("no registered instances"), Error);

  // A ledger recorded against a different corpus is refused.
  CampaignConfig pinned = config;
  pinned.run_id = "r4";
  run_campaign(bench, {LayerTag::kRemember}, oracle, pinned);
  const fs::path meta = pinned.runs_root / "r4" / "run.json";
  json doc = json::parse(read_file(meta));
  doc["corpus_digest"] = "something else";
  write_file(meta, doc.dump(2) + "\n");
  CHECK_THROWS_WITH_AS(run_campaign(bench, {LayerTag::kRemember}, oracle, pinned),
                       doctest::Contains("different corpus"), Error);
}
