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

#include "layerbench/patch_eval.hpp"

#include <nlohmann/json.hpp>

#include "layerbench/error.hpp"
#include "layerbench/exec.hpp"
#include "layerbench/fs_util.hpp"
#include "layerbench/scope.hpp"

namespace layerbench {
namespace {

using nlohmann::json;

std::string summarize(const ExecResult& result) {
  std::string out = result.stderr_text.empty() ? result.stdout_text : result.stderr_text;
  if (out.size() > 2000) {
    out.resize(2000);
    out += "...";
  }
  return out;
}

}  // namespace

std::optional<PatchAttempt> parse_patch_attempt(const std::string& line) {
  json doc = json::parse(line, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
  if (!doc.contains("bug_id") || !doc.contains("file") || !doc.contains("function_name") ||
      !doc.contains("replacement")) {
    return std::nullopt;
  }
  PatchAttempt attempt;
  try {
    attempt.bug_id = doc.at("bug_id").get<std::string>();
    attempt.file = doc.at("file").get<std::string>();
    attempt.function_name = doc.at("function_name").get<std::string>();
    attempt.replacement = doc.at("replacement").get<std::string>();
    if (doc.contains("variant_id")) {
      attempt.variant_id = doc.at("variant_id").get<std::string>();
    }
    if (doc.contains("attempt")) {
      attempt.attempt = doc.at("attempt").get<int>();
    }
  } catch (const json::exception&) {
    return std::nullopt;
  }
  if (attempt.bug_id.empty() || attempt.function_name.empty() || attempt.replacement.empty()) {
    return std::nullopt;
  }
  return attempt;
}

std::string canonical_token_signature(std::string_view text, const SubjectProfile& profile) {
  std::vector<Token> tokens = tokenize(text, profile);
  std::map<std::string, std::string> ids;
  for (Token& token : tokens) {
    if (token.kind != TokenKind::kIdentifier) continue;
    auto it = ids.find(token.text);
    if (it == ids.end()) {
      it = ids.emplace(token.text, "ID" + std::to_string(ids.size() + 1)).first;
    }
    token.text = it->second;
  }
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0 && needs_separator(tokens[i - 1], tokens[i], profile)) {
      out += ' ';
    }
    out += tokens[i].text;
  }
  return out;
}

bool judge_exact_match(const std::string& candidate, const std::string& reference,
                       const SubjectProfile& profile) {
  return strip_comments_and_ws(candidate, profile) == strip_comments_and_ws(reference, profile);
}

bool judge_syntactic_equivalence(const std::string& candidate, const std::string& reference,
                                 const SubjectProfile& profile) {
  return canonical_token_signature(candidate, profile) ==
         canonical_token_signature(reference, profile);
}

PatchJudgment judge_patch(const Benchmark& benchmark, const BugInstance& instance,
                          const PatchAttempt& attempt, const std::filesystem::path& work_dir,
                          const JudgeOptions& options) {
  PatchJudgment judgment;

  stage_checkout(instance, /*fixed=*/false, work_dir);

  const std::filesystem::path target = work_dir / attempt.file;
  if (!std::filesystem::exists(target)) {
    judgment.detail = "patched file not in checkout: " + attempt.file.string();
    return judgment;
  }

  const std::string original = read_file(target);
  Span span;
  try {
    const std::vector<Token> tokens = tokenize(original, benchmark.profile);
    const auto defs = find_function_definitions(tokens, attempt.function_name);
    if (defs.empty()) {
      judgment.detail = "function " + attempt.function_name + " not found in " +
                        attempt.file.string();
      return judgment;
    }
    span = defs.front().full_span;
  } catch (const Error& e) {
    judgment.detail = std::string("cannot analyze patched file: ") + e.what();
    return judgment;
  }

  std::string patched = original.substr(0, span.begin);
  patched += attempt.replacement;
  patched += original.substr(span.end);
  write_file(target, patched);

  ExecRequest build;
  build.command = instance.build_cmd;
  build.workdir = work_dir;
  build.timeout_s = options.timeout_s;
  const ExecResult build_result = execute_build_test(build);
  if (!build_result.ok()) {
    judgment.detail = "build failed: " + summarize(build_result);
    return judgment;
  }
  judgment.compiled = true;

  ExecRequest test;
  test.command = instance.test_cmd;
  test.workdir = work_dir;
  test.timeout_s = options.timeout_s;
  const ExecResult test_result = execute_build_test(test);
  if (!test_result.ok()) {
    judgment.detail = "tests failed: " + summarize(test_result);
    return judgment;
  }

  judgment.plausible = true;
  try {
    judgment.exact =
        judge_exact_match(attempt.replacement, instance.fixed_function.text, benchmark.profile);
    judgment.syntactic = judgment.exact ||
                         judge_syntactic_equivalence(attempt.replacement,
                                                     instance.fixed_function.text,
                                                     benchmark.profile);
  } catch (const Error&) {
    // Text the lexer cannot handle (the compiler may still accept it) simply
    // does not match syntactically.
    judgment.syntactic = false;
    judgment.exact = false;
  }
  return judgment;
}

PatchSetResult evaluate_patch_set(const Benchmark& benchmark, const BugInstance& instance,
                                  const std::vector<PatchAttempt>& attempts,
                                  const std::filesystem::path& work_root, int budget,
                                  const JudgeOptions& options) {
  PatchSetResult result;
  result.target_id = instance.id;

  int used = 0;
  for (const PatchAttempt& attempt : attempts) {
    if (used >= budget) break;
    ++used;
    const std::filesystem::path work_dir =
        work_root / instance.id / ("a" + std::to_string(used));
    std::filesystem::remove_all(work_dir);
    AttemptJudgment entry;
    entry.attempt = attempt;
    entry.attempt.attempt = used;
    entry.judgment = judge_patch(benchmark, instance, attempt, work_dir, options);
    if (entry.judgment.plausible) {
      result.plausible = true;
      result.syntactic = result.syntactic || entry.judgment.syntactic;
      result.exact = result.exact || entry.judgment.exact;
    }
    result.attempts.push_back(std::move(entry));
  }
  return result;
}

LintReport lint_corpus(const Benchmark& benchmark, const std::filesystem::path& scratch,
                       const JudgeOptions& options) {
  std::vector<const BugInstance*> instances;
  for (const BugInstance& bug : benchmark.bugs) instances.push_back(&bug);
  for (const auto& [key, set] : benchmark.variant_sets) {
    for (const Variant& variant : set.variants) instances.push_back(&variant.instance);
  }

  LintReport report;
  for (const BugInstance* instance : instances) {
    ++report.checked;

    PatchAttempt resubmission;
    resubmission.bug_id = instance->id;
    resubmission.attempt = 1;
    resubmission.file = instance->buggy_file;
    resubmission.function_name = instance->function_name;

    resubmission.replacement = instance->fixed_function.text;
    const PatchJudgment fixed = judge_patch(benchmark, *instance, resubmission,
                                            scratch / instance->id / "fixed", options);
    if (!fixed.plausible) {
      report.issues.push_back(
          {instance->id, "reference fix is not plausible: " + fixed.detail});
    }

    resubmission.replacement = instance->buggy_function.text;
    const PatchJudgment buggy = judge_patch(benchmark, *instance, resubmission,
                                            scratch / instance->id / "buggy", options);
    if (buggy.plausible) {
      report.issues.push_back({instance->id, "buggy function passes the tests"});
    }
  }
  return report;
}

}  // namespace layerbench
