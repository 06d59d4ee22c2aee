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

#include "layerbench/synth.hpp"

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "layerbench/error.hpp"
#include "layerbench/exec.hpp"
#include "layerbench/fs_util.hpp"
#include "layerbench/lexer.hpp"
#include "layerbench/llm.hpp"
#include "layerbench/scope.hpp"

namespace layerbench {
namespace {

namespace fs = std::filesystem;

std::string trim_copy(const std::string& text) {
  std::size_t begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  std::size_t end = text.find_last_not_of(" \t\r\n");
  return text.substr(begin, end - begin + 1);
}

// Section content keeps its internal layout; only the marker line's newline
// and surrounding blank space are shed, and a final newline is guaranteed.
std::string finish_section(const std::string& raw) {
  std::string body = trim_copy(raw);
  if (!body.empty() && body.back() != '\n') body += '\n';
  return body;
}

std::string default_failing_output(const BugInstance& bug) {
  std::string out = "Failing tests:";
  for (const auto& name : bug.trigger_tests) {
    out += " " + name;
  }
  return out + "\n";
}

// Cache-busting marker appended to the index slot so a re-ask renders a
// distinct prompt instead of replaying the cached bad response.
std::string index_slot(int index, int attempt) {
  std::string slot = std::to_string(index);
  if (attempt > 0) slot += " (retry " + std::to_string(attempt) + ")";
  return slot;
}

std::string run_log(const ExecResult& result) {
  std::string log = result.stderr_text;
  if (!result.stdout_text.empty()) {
    if (!log.empty()) log += "\n";
    log += result.stdout_text;
  }
  return log;
}

VerifyOutcome compile_failure(VerifyPart part, const ExecResult& result,
                              const char* phase) {
  VerifyOutcome outcome;
  outcome.status = VerifyStatus::kCompileFail;
  outcome.part = part;
  if (result.timed_out) {
    outcome.log = std::string(phase) + " timed out\n" + run_log(result);
  } else {
    outcome.log = run_log(result);
  }
  return outcome;
}

}  // namespace

SynthMode synth_mode_from_string(const std::string& name) {
  if (name == "root_cause") return SynthMode::kRootCause;
  if (name == "behavior") return SynthMode::kBehavior;
  throw Error(kErrBadArgs, "unknown synthesis mode '" + name + "'");
}

std::string to_string(SynthMode mode) {
  return mode == SynthMode::kRootCause ? "root_cause" : "behavior";
}

std::string to_string(SynthStatus status) {
  switch (status) {
    case SynthStatus::kUnverified: return "unverified";
    case SynthStatus::kVerified: return "verified";
    case SynthStatus::kRejected: return "rejected";
  }
  return "unverified";
}

std::string to_string(VerifyStatus status) {
  switch (status) {
    case VerifyStatus::kOk: return "ok";
    case VerifyStatus::kCompileFail: return "compile_fail";
    case VerifyStatus::kTestNotFailingOnBuggy: return "test_not_failing_on_buggy";
    case VerifyStatus::kTestFailingOnFixed: return "test_failing_on_fixed";
  }
  return "ok";
}

std::optional<SynthTriple> parse_synth_triple(const std::string& text) {
  constexpr const char* kBuggy = "<<<BUGGY>>>";
  constexpr const char* kFixed = "<<<FIXED>>>";
  constexpr const char* kTest = "<<<TEST>>>";
  const std::size_t p_buggy = text.find(kBuggy);
  if (p_buggy == std::string::npos) return std::nullopt;
  const std::size_t p_fixed = text.find(kFixed, p_buggy);
  if (p_fixed == std::string::npos) return std::nullopt;
  const std::size_t p_test = text.find(kTest, p_fixed);
  if (p_test == std::string::npos) return std::nullopt;

  SynthTriple triple;
  const std::size_t b_begin = p_buggy + std::string(kBuggy).size();
  const std::size_t f_begin = p_fixed + std::string(kFixed).size();
  const std::size_t t_begin = p_test + std::string(kTest).size();
  triple.buggy = finish_section(text.substr(b_begin, p_fixed - b_begin));
  triple.fixed = finish_section(text.substr(f_begin, p_test - f_begin));
  triple.test = finish_section(text.substr(t_begin));
  if (triple.buggy.empty() || triple.fixed.empty() || triple.test.empty()) {
    return std::nullopt;
  }
  return triple;
}

std::optional<std::string> parse_refined_source(const std::string& text) {
  constexpr const char* kSource = "<<<SOURCE>>>";
  const std::size_t pos = text.find(kSource);
  if (pos == std::string::npos) return std::nullopt;
  std::string body = finish_section(text.substr(pos + std::string(kSource).size()));
  if (body.empty()) return std::nullopt;
  return body;
}

std::vector<SynthCandidate> synthesize_variants(const BugInstance& bug, SynthMode mode, int n,
                                                LlmGateway& gateway,
                                                const SynthOptions& options) {
  if (n < 1) throw Error(kErrBadArgs, "candidate count must be at least 1");

  const std::string failing_output = options.failing_output
                                         ? options.failing_output(bug)
                                         : default_failing_output(bug);

  std::string analysis;
  if (mode == SynthMode::kRootCause) {
    CompletionRequest request;
    request.template_id = "understand.root_cause.analyze";
    request.slots = {{"bug_id", bug.id},
                     {"function_name", bug.function_name},
                     {"file", bug.buggy_file.generic_string()},
                     {"buggy_function", bug.buggy_function.text},
                     {"failing_output", failing_output}};
    analysis = gateway.complete(request);
  }

  const std::string parent_stripped =
      strip_comments_and_ws(bug.buggy_function.text, options.profile);

  std::vector<SynthCandidate> candidates;
  for (int i = 1; i <= n; ++i) {
    SynthCandidate candidate;
    candidate.parent_id = bug.id;
    candidate.mode = mode;

    int re_asks = 0;        // malformed responses re-requested, at most 2
    int identical = 0;      // parent clones re-requested, at most 1
    int attempt = 0;        // distinguishes every retry prompt
    while (true) {
      CompletionRequest request;
      if (mode == SynthMode::kRootCause) {
        request.template_id = "understand.root_cause.generate";
        request.slots = {{"bug_id", bug.id},
                         {"index", index_slot(i, attempt)},
                         {"analysis", analysis},
                         {"buggy_function", bug.buggy_function.text},
                         {"fixed_function", bug.fixed_function.text}};
      } else {
        request.template_id = "understand.behavior.generate";
        request.slots = {{"bug_id", bug.id},
                         {"index", index_slot(i, attempt)},
                         {"fixed_function", bug.fixed_function.text},
                         {"failing_output", failing_output}};
      }
      ++attempt;

      const std::string response = gateway.complete(request);
      const auto triple = parse_synth_triple(response);
      if (!triple) {
        if (re_asks < 2) {
          ++re_asks;
          candidate.history.push_back("malformed response, re-asked");
          continue;
        }
        candidate.status = SynthStatus::kRejected;
        candidate.history.push_back("rejected: still malformed after 2 re-asks");
        break;
      }

      const std::string buggy_stripped =
          strip_comments_and_ws(triple->buggy, options.profile);
      if (buggy_stripped == parent_stripped) {
        if (identical < 1) {
          ++identical;
          candidate.history.push_back("identical to parent, re-requested");
          continue;
        }
        candidate.status = SynthStatus::kRejected;
        candidate.history.push_back("rejected: identical to parent twice");
        break;
      }

      candidate.buggy_source = triple->buggy;
      candidate.fixed_source = triple->fixed;
      candidate.test_source = triple->test;
      candidate.history.push_back("generated (" + to_string(mode) + ")");
      break;
    }
    candidates.push_back(std::move(candidate));
  }
  return candidates;
}

VerifyOutcome verify_candidate(const SynthCandidate& candidate, const SynthScaffold& scaffold,
                               const std::filesystem::path& scratch) {
  if (candidate.status != SynthStatus::kUnverified) {
    throw Error(kErrBadArgs, "only unverified candidates can be verified");
  }

  fs::remove_all(scratch);
  write_file(scratch / scaffold.source_file, candidate.buggy_source);
  write_file(scratch / "tests" / scaffold.test_file, candidate.test_source);

  ExecRequest build{scaffold.build_cmd, scratch, scaffold.timeout_s};
  ExecResult built = execute_build_test(build);
  if (!built.ok()) return compile_failure(VerifyPart::kBuggy, built, "buggy build");

  ExecRequest test{scaffold.test_cmd, scratch, scaffold.timeout_s};
  ExecResult buggy_run = execute_build_test(test);
  if (buggy_run.timed_out) {
    return compile_failure(VerifyPart::kTest, buggy_run, "test on buggy build");
  }
  if (buggy_run.ok()) {
    VerifyOutcome outcome;
    outcome.status = VerifyStatus::kTestNotFailingOnBuggy;
    outcome.part = VerifyPart::kTest;
    outcome.log = "test passed on the buggy version\n" + run_log(buggy_run);
    return outcome;
  }

  write_file(scratch / scaffold.source_file, candidate.fixed_source);
  ExecResult rebuilt = execute_build_test(build);
  if (!rebuilt.ok()) return compile_failure(VerifyPart::kFixed, rebuilt, "fixed build");

  ExecResult fixed_run = execute_build_test(test);
  if (fixed_run.timed_out) {
    return compile_failure(VerifyPart::kTest, fixed_run, "test on fixed build");
  }
  if (!fixed_run.ok()) {
    VerifyOutcome outcome;
    outcome.status = VerifyStatus::kTestFailingOnFixed;
    outcome.part = VerifyPart::kTest;
    outcome.log = "test failed on the fixed version\n" + run_log(fixed_run);
    return outcome;
  }
  return VerifyOutcome{};
}

SynthCandidate refine_candidate(SynthCandidate candidate, const VerifyOutcome& outcome,
                                LlmGateway& gateway, int max_refine_iters) {
  if (outcome.ok()) {
    throw Error(kErrBadArgs, "a passing candidate needs no refinement");
  }
  if (candidate.iteration >= max_refine_iters) {
    candidate.status = SynthStatus::kRejected;
    candidate.history.push_back("rejected: refinement budget exhausted after " +
                                std::to_string(candidate.iteration) + " iterations");
    return candidate;
  }

  std::string* part = nullptr;
  const char* part_name = nullptr;
  const char* template_id = nullptr;
  if (outcome.part == VerifyPart::kTest) {
    part = &candidate.test_source;
    part_name = "test_source";
    template_id = "refine.test";
  } else if (outcome.part == VerifyPart::kFixed) {
    part = &candidate.fixed_source;
    part_name = "fixed_source";
    template_id = "refine.compile";
  } else {
    part = &candidate.buggy_source;
    part_name = "buggy_source";
    template_id = "refine.compile";
  }

  for (int attempt = 0; attempt < 3; ++attempt) {
    CompletionRequest request;
    request.template_id = template_id;
    std::string log = outcome.log;
    if (attempt > 0) log += "\n(retry " + std::to_string(attempt) + ")";
    request.slots = {{"log", log}, {"source", *part}};
    const std::string response = gateway.complete(request);
    const auto refined = parse_refined_source(response);
    if (!refined) {
      candidate.history.push_back("malformed refinement, re-asked");
      continue;
    }
    *part = *refined;
    candidate.iteration += 1;
    candidate.review_flag = true;
    candidate.history.push_back("refined " + std::string(part_name) + " after " +
                                to_string(outcome.status) + " (iteration " +
                                std::to_string(candidate.iteration) + ")");
    return candidate;
  }
  candidate.status = SynthStatus::kRejected;
  candidate.history.push_back("rejected: refinement responses stayed malformed");
  return candidate;
}

namespace {

nlohmann::json candidate_to_json(const SynthCandidate& candidate) {
  nlohmann::json doc;
  doc["parent_id"] = candidate.parent_id;
  doc["mode"] = to_string(candidate.mode);
  doc["iteration"] = candidate.iteration;
  doc["status"] = to_string(candidate.status);
  doc["review_flag"] = candidate.review_flag;
  doc["history"] = candidate.history;
  return doc;
}

// The function the variant claims to contain must actually resolve in both
// sources, otherwise the corpus could never locate its regions again.
bool scaffold_resolves(const SynthCandidate& candidate, const std::string& function_name,
                       const SubjectProfile& profile) {
  try {
    resolve_function_scope(candidate.buggy_source, profile, function_name);
    resolve_function_scope(candidate.fixed_source, profile, function_name);
    return true;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

SynthReport build_understand_layer(Benchmark& benchmark, SynthMode mode, LlmGateway& gateway,
                                   const SynthOptions& options) {
  if (options.candidates_per_bug < 1 || options.candidates_per_bug > 5) {
    throw Error(kErrBadArgs, "candidates_per_bug must be within 1..5");
  }

  fs::path scratch_root = options.scratch_dir;
  const bool own_scratch = scratch_root.empty();
  if (own_scratch) {
    scratch_root = fs::temp_directory_path() /
                   ("layerbench-synth-" + std::to_string(::getpid()));
  }

  SynthOptions bound = options;
  bound.profile = benchmark.profile;

  SynthReport report;
  for (const BugInstance& bug : benchmark.bugs) {
    SynthYield yield;
    yield.bug_id = bug.id;
    yield.requested = options.candidates_per_bug;

    std::vector<SynthCandidate> candidates =
        synthesize_variants(bug, mode, options.candidates_per_bug, gateway, bound);

    std::vector<SynthCandidate> verified;
    const fs::path bug_scratch = scratch_root / bug.id;
    for (std::size_t slot = 0; slot < candidates.size(); ++slot) {
      SynthCandidate candidate = std::move(candidates[slot]);
      while (candidate.status == SynthStatus::kUnverified) {
        VerifyOutcome outcome =
            verify_candidate(candidate, options.scaffold, bug_scratch / std::to_string(slot));
        if (outcome.ok()) {
          candidate.status = SynthStatus::kVerified;
          candidate.history.push_back("verified");
          break;
        }
        candidate.history.push_back(to_string(outcome.status));
        candidate = refine_candidate(std::move(candidate), outcome, gateway,
                                     options.max_refine_iters);
      }
      if (candidate.status == SynthStatus::kVerified &&
          !scaffold_resolves(candidate, bug.function_name, benchmark.profile)) {
        candidate.status = SynthStatus::kRejected;
        candidate.history.push_back("rejected: function '" + bug.function_name +
                                    "' does not resolve in the scaffold");
      }
      if (candidate.status == SynthStatus::kVerified) {
        verified.push_back(std::move(candidate));
      } else {
        ++yield.rejected;
      }
    }
    yield.verified = static_cast<int>(verified.size());
    report.yields.push_back(yield);

    if (verified.empty()) {
      report.uncovered.push_back(bug.id);
      std::error_code ec;
      fs::remove_all(bug_scratch, ec);
      continue;
    }

    VariantSet set;
    set.parent_id = bug.id;
    set.layer = LayerTag::kUnderstand;
    for (std::size_t k = 0; k < verified.size(); ++k) {
      const SynthCandidate& candidate = verified[k];
      const fs::path stage = bug_scratch / ("stage" + std::to_string(k));
      write_file(stage / "buggy" / options.scaffold.source_file, candidate.buggy_source);
      write_file(stage / "fixed" / options.scaffold.source_file, candidate.fixed_source);
      write_file(stage / "tests" / options.scaffold.test_file, candidate.test_source);

      Variant variant;
      variant.instance = bug;
      variant.instance.buggy_file = options.scaffold.source_file;
      variant.instance.build_cmd = options.scaffold.build_cmd;
      variant.instance.test_cmd = options.scaffold.test_cmd;
      variant.instance.trigger_tests = {options.scaffold.trigger_test};
      variant.instance.root = stage;
      variant.transform.scheme = to_string(mode);
      set.variants.push_back(std::move(variant));
    }

    try {
      register_variant_set(benchmark, std::move(set));
      const VariantSet* registered =
          benchmark.find_variant_set(LayerTag::kUnderstand, bug.id);
      for (std::size_t k = 0; k < verified.size() && registered != nullptr; ++k) {
        const Variant& variant =
            registered->variants[registered->variants.size() - verified.size() + k];
        write_file(variant.instance.root / "candidate.json",
                   candidate_to_json(verified[k]).dump(2) + "\n");
      }
      report.registered += static_cast<int>(verified.size());
    } catch (const Error& e) {
      report.errors.push_back(bug.id + ": " + std::string(e.what()));
    }
    std::error_code ec;
    fs::remove_all(bug_scratch, ec);
  }

  if (own_scratch) {
    std::error_code ec;
    fs::remove_all(scratch_root, ec);
  }
  return report;
}

}  // namespace layerbench
