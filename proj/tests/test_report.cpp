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
#include <string>
#include <vector>

#include "doctest.h"
#include "layerbench/corpus.hpp"
#include "layerbench/error.hpp"
#include "layerbench/fs_util.hpp"
#include "layerbench/report.hpp"
#include "test_support.hpp"

using namespace layerbench;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

LedgerEntry variant_entry(const std::string& bug, const std::string& variant,
                          LayerTag layer, const std::string& scheme,
                          const std::string& targets, const std::string& producer,
                          bool pp, bool sye = false, bool em = false) {
  LedgerEntry entry;
  entry.kind = "variant";
  entry.bug_id = bug;
  entry.variant_id = variant;
  entry.layer = layer;
  entry.scheme = scheme;
  entry.targets = targets;
  entry.producer = producer;
  entry.pp = pp;
  entry.sye = sye;
  entry.em = em;
  entry.attempts = 1;
  entry.duration_s = 0.25;
  return entry;
}

void write_run(const fs::path& run_dir, const std::string& run_id,
               const std::string& adapter, const std::vector<LedgerEntry>& entries) {
  fs::create_directories(run_dir);
  json meta;
  meta["run_id"] = run_id;
  meta["adapter"] = adapter;
  meta["attempt_budget"] = 10;
  meta["corpus_name"] = "reportfix";
  meta["corpus_digest"] = "digest-0123";
  write_file(run_dir / "run.json", meta.dump(2) + "\n");
  std::string text;
  for (const LedgerEntry& entry : entries) text += to_jsonl(entry);
  write_file(run_dir / "ledger.jsonl", text);
}

// remember: A,B solved of A,B,C. apply/hash-vars: only A (via its first
// variant). understand/root_cause: A FIX_+, B FIX_1, C FIX_0.
std::vector<LedgerEntry> grid_entries() {
  std::vector<LedgerEntry> entries;
  const std::string oracle = "oracle";
  entries.push_back(variant_entry("A", "A", LayerTag::kRemember, "original", "", oracle,
                                  true, true, true));
  entries.push_back(variant_entry("B", "B", LayerTag::kRemember, "original", "", oracle,
                                  true, true, false));
  entries.push_back(
      variant_entry("C", "C", LayerTag::kRemember, "original", "", oracle, false));

  entries.push_back(variant_entry("A", "A-v1", LayerTag::kApply, "hash", "vars", oracle,
                                  true, true, false));
  entries.push_back(
      variant_entry("A", "A-v2", LayerTag::kApply, "hash", "vars", oracle, false));
  entries.push_back(
      variant_entry("B", "B-v1", LayerTag::kApply, "hash", "vars", oracle, false));
  entries.push_back(
      variant_entry("C", "C-v1", LayerTag::kApply, "hash", "vars", oracle, false));

  entries.push_back(variant_entry("A", "A-v3", LayerTag::kUnderstand, "root_cause", "",
                                  oracle, true));
  entries.push_back(variant_entry("A", "A-v4", LayerTag::kUnderstand, "root_cause", "",
                                  oracle, true));
  entries.push_back(variant_entry("A", "A-v5", LayerTag::kUnderstand, "root_cause", "",
                                  oracle, false));
  entries.push_back(variant_entry("B", "B-v2", LayerTag::kUnderstand, "root_cause", "",
                                  oracle, true));
  entries.push_back(variant_entry("B", "B-v3", LayerTag::kUnderstand, "root_cause", "",
                                  oracle, false));
  entries.push_back(variant_entry("B", "B-v4", LayerTag::kUnderstand, "root_cause", "",
                                  oracle, false));
  entries.push_back(variant_entry("C", "C-v2", LayerTag::kUnderstand, "root_cause", "",
                                  oracle, false));
  entries.push_back(variant_entry("C", "C-v3", LayerTag::kUnderstand, "root_cause", "",
                                  oracle, false));
  return entries;
}

const ConfigReport* find_config(const ReportBundle& bundle, const std::string& id) {
  for (const ConfigReport& config : bundle.configs) {
    if (config.config_id == id) return &config;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("load_run reads metadata and entries and flags missing runs") {
  testing::TempDir tmp;
  write_run(tmp.path() / "r1", "r1", "oracle", grid_entries());
  const RunData run = load_run(tmp.path() / "r1");
  CHECK(run.run_id == "r1");
  CHECK(run.adapter == "oracle");
  CHECK(run.corpus_digest == "digest-0123");
  CHECK(run.entries.size() == grid_entries().size());

  CHECK_THROWS_WITH_AS(load_run(tmp.path() / "r2"),
                       doctest::Contains("E_RUN_NOT_FOUND"), Error);
}

TEST_CASE("build_report recomputes layer metrics per configuration") {
  testing::TempDir tmp;
  write_run(tmp.path() / "r1", "r1", "oracle", grid_entries());
  ReportRequest request;
  request.run_dirs = {tmp.path() / "r1"};
  const ReportBundle bundle = build_report(request);

  REQUIRE(bundle.configs.size() == 3);
  CHECK(bundle.configs[0].config_id == "oracle/remember/original");
  CHECK(bundle.configs[1].config_id == "oracle/understand/root_cause");
  CHECK(bundle.configs[2].config_id == "oracle/apply/hash-vars");

  const ConfigReport* remember = find_config(bundle, "oracle/remember/original");
  REQUIRE(remember != nullptr);
  CHECK(remember->total_bugs == 3);
  CHECK(remember->metrics.at("pp").layer_report.solved_bugs == 2);
  CHECK(remember->metrics.at("pp").layer_report.percent == doctest::Approx(200.0 / 3));
  CHECK(remember->metrics.at("sye").layer_report.solved_bugs == 2);
  CHECK(remember->metrics.at("em").layer_report.solved_bugs == 1);

  const ConfigReport* apply = find_config(bundle, "oracle/apply/hash-vars");
  REQUIRE(apply != nullptr);
  CHECK(apply->metrics.at("pp").layer_report.solved_bugs == 1);  // any variant
  CHECK(apply->metrics.at("pp").layer_report.total_bugs == 3);

  const ConfigReport* understand = find_config(bundle, "oracle/understand/root_cause");
  REQUIRE(understand != nullptr);
  const LayerReport& pp = understand->metrics.at("pp").layer_report;
  CHECK(pp.solved_bugs == 1);  // only FIX_+ / FIX_ALL count as solved
  CHECK(pp.class_distribution.at(FixClass::kFix0) == 1);
  CHECK(pp.class_distribution.at(FixClass::kFix1) == 1);
  CHECK(pp.class_distribution.at(FixClass::kFixPlus) == 1);

  // Deltas pair each layered config against the same adapter's baseline.
  REQUIRE(bundle.deltas.size() == 6);  // two layered configs x three metrics
  const DeltaReport* apply_pp = nullptr;
  for (const DeltaReport& delta : bundle.deltas) {
    if (delta.other_config == "oracle/apply/hash-vars" && delta.metric == "pp") {
      apply_pp = &delta;
    }
  }
  REQUIRE(apply_pp != nullptr);
  CHECK(apply_pp->base_percent == doctest::Approx(200.0 / 3));
  CHECK(apply_pp->other_percent == doctest::Approx(100.0 / 3));
  CHECK(apply_pp->delta.relative_change_percent == doctest::Approx(-50.0));
  CHECK(apply_pp->paired_bugs == 3);
  CHECK(apply_pp->test.b == 1);  // B solved on originals only
  CHECK(apply_pp->test.c == 0);
  CHECK(apply_pp->test.p_value == doctest::Approx(1.0));
  CHECK_FALSE(apply_pp->significant);
}

TEST_CASE("incomplete ledgers are rejected with the missing pairs") {
  testing::TempDir tmp;

  SUBCASE("a patch record without its task summary") {
    std::vector<LedgerEntry> entries = grid_entries();
    LedgerEntry orphan;
    orphan.kind = "patch";
    orphan.bug_id = "Z";
    orphan.variant_id = "Z-v1";
    orphan.layer = LayerTag::kApply;
    orphan.scheme = "hash";
    orphan.targets = "vars";
    orphan.producer = "oracle";
    orphan.attempt = 1;
    entries.push_back(orphan);
    write_run(tmp.path() / "r1", "r1", "oracle", entries);
    ReportRequest request;
    request.run_dirs = {tmp.path() / "r1"};
    CHECK_THROWS_WITH_AS(build_report(request), doctest::Contains("Z-v1"), Error);
  }

  SUBCASE("a corpus instance never judged") {
    json manifest;
    manifest["name"] = "reportfix";
    manifest["subject_language"] = "cpp";
    manifest["bugs"] = json::array();
    for (const char* id : {"A", "B"}) {
      json bug;
      bug["id"] = id;
      bug["project"] = "p";
      bug["buggy_file"] = "src.cpp";
      bug["function_name"] = "f";
      bug["build_cmd"] = "true";
      bug["test_cmd"] = "false";
      bug["trigger_tests"] = json::array({"t"});
      bug["layer"] = "remember";
      manifest["bugs"].push_back(bug);
      testing::write_tree(tmp.path() / "corpus", {
          {"bugs/" + std::string(id) + "/buggy/src.cpp", "int f() { return 1; }\n"},
          {"bugs/" + std::string(id) + "/fixed/src.cpp", "int f() { return 2; }\n"},
      });
    }
    write_file(tmp.path() / "corpus/manifest.json", manifest.dump(2) + "\n");
    const Benchmark bench = load_manifest(tmp.path() / "corpus");

    write_run(tmp.path() / "r1", "r1", "oracle",
              {variant_entry("A", "A", LayerTag::kRemember, "original", "", "oracle",
                             true)});
    ReportRequest request;
    request.run_dirs = {tmp.path() / "r1"};
    request.corpus = &bench;
    CHECK_THROWS_WITH_AS(build_report(request), doctest::Contains("oracle:B"), Error);
  }
}

TEST_CASE("emission is deterministic and consistent across formats") {
  testing::TempDir tmp;
  write_run(tmp.path() / "r1", "r1", "oracle", grid_entries());
  ReportRequest request;
  request.run_dirs = {tmp.path() / "r1"};

  const ReportFiles first = emit_report(request, tmp.path() / "out1");
  const ReportFiles second = emit_report(request, tmp.path() / "out2");
  CHECK(read_file(first.markdown) == read_file(second.markdown));
  CHECK(read_file(first.csv) == read_file(second.csv));
  CHECK(read_file(first.json) == read_file(second.json));

  const std::string markdown = read_file(first.markdown);
  const std::string csv = read_file(first.csv);
  CHECK(markdown.find("66.67%") != std::string::npos);
  CHECK(csv.find(",66.67,") != std::string::npos);
  CHECK(markdown.find("33.33%") != std::string::npos);
  CHECK(csv.find(",33.33,") != std::string::npos);
  CHECK(markdown.find("digest-0123") != std::string::npos);

  const json doc = json::parse(read_file(first.json));
  CHECK(doc.at("configs").size() == 3);
  CHECK(doc.at("runs")[0].at("corpus_digest").get<std::string>() == "digest-0123");
}

TEST_CASE("fixed-point percentages and deltas render as published") {
  testing::TempDir tmp;

  // 177 of 217 original bugs solved; on the perturbed layer the solved set
  // shrinks to 54 of the 149-strong baseline subset.
  std::vector<LedgerEntry> entries;
  for (int i = 1; i <= 217; ++i) {
    const std::string id = "B" + std::to_string(i);
    entries.push_back(variant_entry(id, id, LayerTag::kRemember, "original", "",
                                    "anchor", i <= 177));
  }
  write_run(tmp.path() / "anchor", "anchor", "anchor", entries);
  ReportRequest request;
  request.run_dirs = {tmp.path() / "anchor"};
  const ReportFiles files = emit_report(request, tmp.path() / "out");
  const std::string markdown = read_file(files.markdown);
  CHECK(markdown.find("| 217 | 81.57%") != std::string::npos);

  std::vector<LedgerEntry> drop;
  for (int i = 1; i <= 217; ++i) {
    const std::string id = "B" + std::to_string(i);
    drop.push_back(variant_entry(id, id, LayerTag::kRemember, "original", "", "hasheval",
                                 i <= 149));
    drop.push_back(variant_entry(id, id + "-v1", LayerTag::kApply, "hash", "funcs",
                                 "hasheval", i <= 54));
  }
  write_run(tmp.path() / "drop", "drop", "hasheval", drop);
  ReportRequest drop_request;
  drop_request.run_dirs = {tmp.path() / "drop"};
  const ReportBundle bundle = build_report(drop_request);
  const DeltaReport* pp_delta = nullptr;
  for (const DeltaReport& delta : bundle.deltas) {
    if (delta.metric == "pp") pp_delta = &delta;
  }
  REQUIRE(pp_delta != nullptr);
  CHECK(format_percent(pp_delta->base_percent) == "68.66");
  CHECK(format_percent(pp_delta->other_percent) == "24.88");
  CHECK(format_percent(pp_delta->delta.relative_change_percent) == "-63.76");
  CHECK(pp_delta->test.b == 95);
  CHECK(pp_delta->test.c == 0);
  CHECK(pp_delta->significant);

  const ReportFiles drop_files = emit_report(drop_request, tmp.path() / "out-drop");
  const std::string drop_md = read_file(drop_files.markdown);
  CHECK(drop_md.find("-63.76% *") != std::string::npos);
}
