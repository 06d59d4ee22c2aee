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

#include <set>
#include <string>

#include <doctest.h>

#include "layerbench/error.hpp"
#include "layerbench/fs_util.hpp"
#include "layerbench/llm.hpp"
#include "layerbench/rename.hpp"
#include "test_support.hpp"

namespace layerbench {
namespace {

const SubjectProfile& profile() {
  static const SubjectProfile p = default_cfamily_profile();
  return p;
}

TEST_CASE("hash_identifier derives prefixed digests") {
  CHECK(hash_identifier("count", false, 1700000000, profile(), {}) == "v_a723129d57fb82f7");
  CHECK(hash_identifier("parseIndex", true, 1700000000, profile(), {}) ==
        "f_ac5c7841ca855f67");
}

TEST_CASE("hash_identifier re-salts on collision") {
  CHECK(hash_identifier("x", false, 42, profile(), {}) == "v_e80c012513e093d4");
  CHECK(hash_identifier("x", false, 42, profile(), {"v_e80c012513e093d4"}) ==
        "v_44d90bac33fb31cf");
  // Two consecutive collisions walk further down the salt sequence.
  const std::string third =
      hash_identifier("x", false, 42, profile(), {"v_e80c012513e093d4", "v_44d90bac33fb31cf"});
  CHECK(third != "v_e80c012513e093d4");
  CHECK(third != "v_44d90bac33fb31cf");
  CHECK(third.rfind("v_", 0) == 0);
}

TEST_CASE("build_hash_plan is deterministic and collision-free") {
  std::vector<RenameCandidate> candidates = {
      {"alpha", false}, {"beta", false}, {"compute", true}};
  const std::set<std::string> reserved = {"gamma", "main"};

  const RenamePlan a = build_hash_plan(candidates, RenameTargets::kBoth, 1111, profile(), reserved);
  const RenamePlan b = build_hash_plan(candidates, RenameTargets::kBoth, 1111, profile(), reserved);
  CHECK(a.mapping == b.mapping);
  CHECK(a.scheme == "hash");
  CHECK(a.clock_stamp == 1111);

  std::set<std::string> fresh;
  for (const auto& [old_name, new_name] : a.mapping) {
    CHECK(is_valid_identifier(new_name, profile()));
    CHECK(!profile().is_keyword(new_name));
    CHECK(reserved.count(new_name) == 0);
    CHECK(new_name != old_name);
    CHECK(fresh.insert(new_name).second);
  }
  CHECK(a.mapping.at("alpha").rfind("v_", 0) == 0);
  CHECK(a.mapping.at("compute").rfind("f_", 0) == 0);

  // A different stamp yields a different plan.
  const RenamePlan c = build_hash_plan(candidates, RenameTargets::kBoth, 2222, profile(), reserved);
  CHECK(c.mapping != a.mapping);

  CHECK_THROWS_AS(
      build_hash_plan({{"dup", false}, {"dup", false}}, RenameTargets::kVars, 1, profile(), {}),
      Error);
}

TEST_CASE("apply_text_edits replaces spans and rejects overlap") {
  const std::string text = "abc def ghi";
  CHECK(apply_text_edits(text, {{{4, 7}, "XY"}}) == "abc XY ghi");
  // Order of the input does not matter.
  CHECK(apply_text_edits(text, {{{8, 11}, "Z"}, {{0, 3}, "Q"}}) == "Q def Z");
  CHECK(apply_text_edits(text, {}) == text);

  try {
    apply_text_edits(text, {{{0, 5}, "A"}, {{4, 7}, "B"}});
    FAIL("expected overlap error");
  } catch (const Error& e) {
    CHECK(e.code() == kErrRenameOverlap);
  }
  CHECK_THROWS_AS(apply_text_edits(text, {{{8, 20}, "Z"}}), Error);
}

TEST_CASE("rename_in_function touches only the named function") {
  const std::string source =
      "int helper(int x) { return x + 1; }\n"
      "int target(int x, int y) {\n"
      "  int sum = x + y;\n"
      "  return helper(sum) + x;\n"
      "}\n";
  const std::map<std::string, std::string> mapping = {
      {"x", "v_one"}, {"sum", "v_two"}, {"missing", "v_three"}};

  const std::string out = rename_in_function(source, "target", mapping, profile());
  CHECK(out.find("int target(int v_one, int y)") != std::string::npos);
  CHECK(out.find("int v_two = v_one + y;") != std::string::npos);
  CHECK(out.find("return helper(v_two) + v_one;") != std::string::npos);
  // The other function keeps its own x.
  CHECK(out.find("int helper(int x) { return x + 1; }") != std::string::npos);
  CHECK(out.find("v_three") == std::string::npos);
}

TEST_CASE("rename_function_everywhere rewrites definitions, prototypes and calls") {
  testing::TempDir tmp;
  testing::write_tree(tmp.path(), {
      {"main.cpp",
       "int foo(int a);\n"
       "int main() { return foo(1) + foo(2); }\n"},
      {"util.cpp", "int foo(int a) { return a * 2; }\n"},
      {"tests/check.cpp", "int run() { return foo(3); }\n"},
      {"notes.txt", "foo( stays as text\n"},
  });

  const int rewritten = rename_function_everywhere(tmp.path(), "foo", "f_new", profile());
  CHECK(rewritten == 5);  // prototype + 2 calls + definition + test call

  const std::string main_cpp = read_file(tmp.path() / "main.cpp");
  CHECK(main_cpp == "int f_new(int a);\nint main() { return f_new(1) + f_new(2); }\n");
  CHECK(read_file(tmp.path() / "util.cpp") == "int f_new(int a) { return a * 2; }\n");
  CHECK(read_file(tmp.path() / "tests/check.cpp") == "int run() { return f_new(3); }\n");
  CHECK(read_file(tmp.path() / "notes.txt") == "foo( stays as text\n");
}

TEST_CASE("build_rephrase_plan retries rejected proposals and then succeeds") {
  testing::TempDir tmp;
  int calls = 0;
  LlmGateway gateway(
      LlmMode::kRecord, tmp.path() / "transcripts", ProviderConfig{},
      /*template_dir=*/{},
      [&calls](const ProviderConfig&, const std::string& prompt) -> std::string {
        ++calls;
        if (prompt.find("A previous proposal was rejected") == std::string::npos) {
          // First round: collides with a reserved name.
          return "x -> total\ny -> carry\n";
        }
        return "x -> amount\ny -> carry\n";
      });

  const std::vector<RenameCandidate> candidates = {{"x", false}, {"y", false}};
  const RenamePlan plan = build_rephrase_plan(
      candidates, RenameTargets::kVars, 7, profile(), {"total"}, gateway, "target",
      "int target(int x, int y) { return x + y; }");
  CHECK(calls == 2);
  CHECK(plan.scheme == "rephrase");
  CHECK(plan.mapping.at("x") == "amount");
  CHECK(plan.mapping.at("y") == "carry");
}

TEST_CASE("build_rephrase_plan gives up after the round limit") {
  testing::TempDir tmp;
  int calls = 0;
  LlmGateway gateway(LlmMode::kRecord, tmp.path() / "transcripts", ProviderConfig{},
                     /*template_dir=*/{},
                     [&calls](const ProviderConfig&, const std::string& prompt) -> std::string {
                       ++calls;
                       // Echo part of the prompt so each round renders a
                       // distinct but equally unusable proposal.
                       return "x -> int\nnoise " + std::to_string(prompt.size()) + "\n";
                     });

  try {
    build_rephrase_plan({{"x", false}}, RenameTargets::kVars, 7, profile(), {}, gateway,
                        "target", "int target(int x) { return x; }");
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.code() == kErrRenameIncomplete);
    CHECK(std::string(e.what()).find("'int'") != std::string::npos);
  }
  CHECK(calls == 3);
}

TEST_CASE("rephrase proposals must cover every candidate") {
  testing::TempDir tmp;
  LlmGateway gateway(LlmMode::kRecord, tmp.path() / "transcripts", ProviderConfig{},
                     /*template_dir=*/{},
                     [](const ProviderConfig&, const std::string&) -> std::string {
                       return "x -> amount\n";  // y is never mapped
                     });
  CHECK_THROWS_AS(build_rephrase_plan({{"x", false}, {"y", false}}, RenameTargets::kVars, 7,
                                      profile(), {}, gateway, "t", "int t(int x,int y){return 0;}"),
                  Error);
}

TEST_CASE("rename target names round-trip") {
  CHECK(rename_targets_from_string("vars") == RenameTargets::kVars);
  CHECK(rename_targets_from_string("funcs") == RenameTargets::kFuncs);
  CHECK(rename_targets_from_string("both") == RenameTargets::kBoth);
  CHECK(to_string(RenameTargets::kFuncs) == "funcs");
  CHECK_THROWS_AS(rename_targets_from_string("all"), Error);
}

}  // namespace
}  // namespace layerbench
