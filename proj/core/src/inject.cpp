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

#include "layerbench/inject.hpp"

#include <unistd.h>

#include <algorithm>
#include <nlohmann/json.hpp>
#include <sstream>

#include "layerbench/error.hpp"
#include "layerbench/exec.hpp"
#include "layerbench/fs_util.hpp"
#include "layerbench/lexer.hpp"
#include "layerbench/llm.hpp"
#include "layerbench/scope.hpp"

namespace layerbench {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path mirror_of(const fs::path& workspace, const std::string& repo) {
  return workspace / "mirrors" / repo;
}

std::string trim_copy(const std::string& text) {
  std::size_t begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  std::size_t end = text.find_last_not_of(" \t\r\n");
  return text.substr(begin, end - begin + 1);
}

// Content of the single `marker` section of a response: everything after the
// marker, trimmed, with a guaranteed final newline. Empty -> nullopt.
std::optional<std::string> extract_section(const std::string& text, const char* marker) {
  const std::size_t pos = text.find(marker);
  if (pos == std::string::npos) return std::nullopt;
  std::string body = trim_copy(text.substr(pos + std::string(marker).size()));
  if (body.empty()) return std::nullopt;
  if (body.back() != '\n') body += '\n';
  return body;
}

// First point where the model's file diverges from what a function-local
// edit would produce, rendered as human-readable diff evidence.
std::string divergence_evidence(const std::string& expected, const std::string& actual) {
  std::size_t i = 0;
  const std::size_t limit = std::min(expected.size(), actual.size());
  while (i < limit && expected[i] == actual[i]) ++i;
  auto context = [](const std::string& text, std::size_t at) {
    const std::size_t from = at < 20 ? 0 : at - 20;
    return text.substr(from, std::min<std::size_t>(40, text.size() - from));
  };
  return "first divergence at byte " + std::to_string(i) + "; expected context \"" +
         context(expected, i) + "\" got \"" + context(actual, i) + "\"";
}

struct ParsedRecord {
  CloneCandidate candidate;
  std::string problem;  // non-empty when the record is unusable
};

ParsedRecord parse_record(const std::string& line) {
  ParsedRecord parsed;
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::exception& e) {
    parsed.problem = std::string("unparsable record: ") + e.what();
    return parsed;
  }
  for (const char* key :
       {"parent_id", "repo", "path", "function", "snippet", "build_cmd", "test_cmd"}) {
    if (!doc.contains(key) || !doc.at(key).is_string()) {
      parsed.problem = std::string("missing string field '") + key + "'";
      return parsed;
    }
  }
  parsed.candidate.parent_id = doc.at("parent_id").get<std::string>();
  parsed.candidate.repo = doc.at("repo").get<std::string>();
  parsed.candidate.path = fs::path(doc.at("path").get<std::string>());
  parsed.candidate.function_name = doc.at("function").get<std::string>();
  parsed.candidate.snippet = doc.at("snippet").get<std::string>();
  parsed.candidate.build_cmd = doc.at("build_cmd").get<std::string>();
  parsed.candidate.test_cmd = doc.at("test_cmd").get<std::string>();
  return parsed;
}

std::string run_log(const ExecResult& result) {
  std::string log;
  if (result.timed_out) log += "command timed out\n";
  log += result.stderr_text;
  if (!result.stdout_text.empty()) {
    if (!log.empty() && log.back() != '\n') log += "\n";
    log += result.stdout_text;
  }
  return log;
}

// Directory holding the host's tests, probing the two conventional names.
std::optional<fs::path> existing_test_dir(const fs::path& host) {
  for (const char* name : {"tests", "test"}) {
    if (fs::is_directory(host / name)) return fs::path(name);
  }
  return std::nullopt;
}

constexpr const char* kScaffoldRunner =
    "set -e\n"
    "for t in tests/injected_*.sh; do\n"
    "  [ -e \"$t\" ] || continue\n"
    "  sh \"$t\"\n"
    "done\n";

// Materializes one working checkout of the host: pristine or with the
// injected file, always with the generated test and any scaffold files.
void materialize_checkout(const fs::path& host, const fs::path& dest,
                          const InjectedVariant& variant, bool injected) {
  fs::remove_all(dest);
  copy_tree(host, dest);
  if (injected) {
    write_file(dest / variant.instance.buggy_file, variant.injected_file_text);
  }
  for (const auto& [rel, content] : variant.scaffold_files) {
    write_file(dest / rel, content);
  }
  write_file(dest / variant.test_file, variant.test_source);
}

// Checks that `response` differs from `original` only inside the named
// function. Returns empty on success, otherwise the rejection reason.
std::string confinement_violation(const std::string& original, const std::string& response,
                                  const std::string& function_name,
                                  const SubjectProfile& profile) {
  ScopeMap orig_scope;
  ScopeMap resp_scope;
  try {
    orig_scope = resolve_function_scope(original, profile, function_name);
    resp_scope = resolve_function_scope(response, profile, function_name);
  } catch (const Error& e) {
    return std::string("function '") + function_name + "' no longer resolves: " + e.what();
  }
  const std::string expected =
      original.substr(0, orig_scope.function_span.begin) +
      response.substr(resp_scope.function_span.begin,
                      resp_scope.function_span.end - resp_scope.function_span.begin) +
      original.substr(orig_scope.function_span.end);
  if (response == expected) return "";
  return "edited outside function '" + function_name + "': " +
         divergence_evidence(expected, response);
}

}  // namespace

std::string to_string(InjectStatus status) {
  switch (status) {
    case InjectStatus::kUnverified: return "unverified";
    case InjectStatus::kVerified: return "verified";
    case InjectStatus::kRejected: return "rejected";
  }
  return "unverified";
}

IngestReport ingest_clone_candidates(const fs::path& search_export, const fs::path& workspace,
                                     const SubjectProfile& profile) {
  if (!fs::exists(search_export)) {
    throw Error(kErrSearchExport, "search export not found: " + search_export.string());
  }

  IngestReport report;
  std::map<std::string, std::vector<CloneCandidate>> by_parent;
  std::set<std::string> seen_keys;

  std::istringstream lines(read_file(search_export));
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (trim_copy(line).empty()) continue;
    const std::string where = "line " + std::to_string(line_no);

    ParsedRecord parsed = parse_record(line);
    if (!parsed.problem.empty()) {
      report.dropped.push_back(where + ": " + parsed.problem);
      continue;
    }
    CloneCandidate& candidate = parsed.candidate;

    const std::string key = candidate.parent_id + "\x1f" + candidate.repo + "\x1f" +
                            candidate.path.generic_string() + "\x1f" +
                            candidate.function_name;
    if (!seen_keys.insert(key).second) {
      report.dropped.push_back(where + ": duplicate record for " + candidate.repo + "/" +
                               candidate.path.generic_string());
      continue;
    }

    const fs::path mirror = mirror_of(workspace, candidate.repo);
    if (!fs::is_directory(mirror)) {
      report.dropped.push_back(where + ": repo '" + candidate.repo + "' is not mirrored");
      continue;
    }
    const fs::path file = mirror / candidate.path;
    if (!fs::is_regular_file(file)) {
      report.dropped.push_back(where + ": file '" + candidate.path.generic_string() +
                               "' not found in mirror of '" + candidate.repo + "'");
      continue;
    }
    try {
      resolve_function_scope(read_file(file), profile, candidate.function_name,
                             candidate.path);
    } catch (const Error&) {
      report.dropped.push_back(where + ": function '" + candidate.function_name +
                               "' not found in " + candidate.repo + "/" +
                               candidate.path.generic_string());
      continue;
    }

    candidate.exists_verified = true;
    by_parent[candidate.parent_id].push_back(std::move(candidate));
  }

  for (auto& [parent_id, candidates] : by_parent) {
    std::sort(candidates.begin(), candidates.end(),
              [](const CloneCandidate& a, const CloneCandidate& b) {
                if (a.repo != b.repo) return a.repo < b.repo;
                return a.path.generic_string() < b.path.generic_string();
              });
    if (candidates.size() > 5) {
      for (std::size_t i = 5; i < candidates.size(); ++i) {
        report.dropped.push_back("parent " + parent_id + ": per-parent cap of 5 drops " +
                                 candidates[i].repo + "/" +
                                 candidates[i].path.generic_string());
      }
      candidates.resize(5);
    }
    report.per_parent[parent_id] = static_cast<int>(candidates.size());
    for (auto& candidate : candidates) {
      report.candidates.push_back(std::move(candidate));
    }
  }
  return report;
}

InjectedVariant inject_bug(const CloneCandidate& candidate, const BugInstance& parent,
                           LlmGateway& gateway, const fs::path& workspace,
                           const SubjectProfile& profile) {
  if (!candidate.exists_verified) {
    throw Error(kErrBadArgs, "candidate for '" + candidate.parent_id +
                                 "' has not passed the existence check");
  }

  InjectedVariant variant;
  variant.clone_origin = candidate;
  variant.instance.id = parent.id;  // real id assigned at registration
  variant.instance.project = candidate.repo;
  variant.instance.buggy_file = candidate.path;
  variant.instance.function_name = candidate.function_name;
  variant.instance.build_cmd = candidate.build_cmd;
  variant.instance.test_cmd = candidate.test_cmd;

  const std::string original =
      read_file(mirror_of(workspace, candidate.repo) / candidate.path);

  for (int attempt = 1; attempt <= 3; ++attempt) {
    CompletionRequest request;
    request.template_id = "analyze.inject.bug";
    request.slots = {{"parent_function", parent.function_name},
                     {"parent_buggy", parent.buggy_function.text},
                     {"parent_fixed", parent.fixed_function.text},
                     {"path", candidate.path.generic_string()},
                     {"repo", candidate.repo},
                     {"file_text", original},
                     {"function", candidate.function_name},
                     {"attempt", std::to_string(attempt)}};
    const std::string response = gateway.complete(request);

    const auto file_text = extract_section(response, "<<<FILE>>>");
    if (!file_text) {
      variant.history.push_back("malformed injection response, re-asked");
      continue;
    }
    if (*file_text == original) {
      variant.status = InjectStatus::kRejected;
      variant.rejection_reason = "file returned unchanged; no defect introduced";
      variant.history.push_back("rejected: " + variant.rejection_reason);
      return variant;
    }
    const std::string violation =
        confinement_violation(original, *file_text, candidate.function_name, profile);
    if (!violation.empty()) {
      variant.status = InjectStatus::kRejected;
      variant.rejection_reason = violation;
      variant.history.push_back("rejected: " + violation);
      return variant;
    }
    variant.injected_file_text = *file_text;
    variant.history.push_back("defect injected on attempt " + std::to_string(attempt));
    return variant;
  }

  variant.status = InjectStatus::kRejected;
  variant.rejection_reason = "injection response still malformed after 2 re-asks";
  variant.history.push_back("rejected: " + variant.rejection_reason);
  return variant;
}

void generate_tests(InjectedVariant& variant, const BugInstance& parent, LlmGateway& gateway,
                    const fs::path& workspace, const SubjectProfile& profile) {
  (void)parent;
  if (variant.status != InjectStatus::kUnverified || variant.injected_file_text.empty()) {
    throw Error(kErrBadArgs, "tests can only be generated for an unverified injection");
  }

  const CloneCandidate& candidate = variant.clone_origin;
  const fs::path host = mirror_of(workspace, candidate.repo);
  const std::string original = read_file(host / candidate.path);

  const ScopeMap injected_scope =
      resolve_function_scope(variant.injected_file_text, profile, candidate.function_name);
  const std::string injected_function = variant.injected_file_text.substr(
      injected_scope.function_span.begin,
      injected_scope.function_span.end - injected_scope.function_span.begin);
  const ScopeMap original_scope =
      resolve_function_scope(original, profile, candidate.function_name, candidate.path);
  const std::string original_function =
      original.substr(original_scope.function_span.begin,
                      original_scope.function_span.end - original_scope.function_span.begin);

  fs::path test_dir;
  std::string extension = ".sh";
  if (const auto existing = existing_test_dir(host)) {
    test_dir = *existing;
    for (const auto& rel : list_files(host / test_dir)) {
      if (rel.has_extension()) {
        extension = rel.extension().string();
        break;
      }
    }
  } else {
    test_dir = "tests";
    variant.scaffold_files[test_dir / "run_all.sh"] = kScaffoldRunner;
    variant.history.push_back("host has no test tree; created a minimal runner");
  }
  const std::string stem = "injected_" + candidate.function_name + "_test";
  variant.test_file = test_dir / (stem + extension);

  for (int attempt = 1; attempt <= 3; ++attempt) {
    CompletionRequest request;
    request.template_id = "analyze.inject.tests";
    request.slots = {{"repo", candidate.repo},
                     {"function", candidate.function_name},
                     {"path", candidate.path.generic_string()},
                     {"function_text", injected_function},
                     {"original_text", original_function},
                     {"build_cmd", candidate.build_cmd},
                     {"test_cmd", candidate.test_cmd},
                     {"attempt", std::to_string(attempt)}};
    const std::string response = gateway.complete(request);

    const auto test_text = extract_section(response, "<<<TEST>>>");
    if (!test_text) {
      variant.history.push_back("malformed test response, re-asked");
      continue;
    }
    variant.test_source = *test_text;
    variant.instance.trigger_tests = {stem};
    variant.history.push_back("test generated into " + variant.test_file.generic_string());
    return;
  }

  variant.status = InjectStatus::kRejected;
  variant.rejection_reason = "test response still malformed after 2 re-asks";
  variant.history.push_back("rejected: " + variant.rejection_reason);
}

void verify_refine(InjectedVariant& variant, LlmGateway& gateway, const fs::path& workspace,
                   const SubjectProfile& profile, const InjectVerifyOptions& options) {
  if (variant.status != InjectStatus::kUnverified || variant.test_source.empty()) {
    throw Error(kErrBadArgs, "only unverified variants with a test can be verified");
  }

  const CloneCandidate& candidate = variant.clone_origin;
  const fs::path host = mirror_of(workspace, candidate.repo);
  const std::string original = read_file(host / candidate.path);

  fs::path scratch = options.scratch_dir;
  const bool own_scratch = scratch.empty();
  if (own_scratch) {
    scratch = fs::temp_directory_path() /
              ("layerbench-inject-" + std::to_string(::getpid()));
  }
  const fs::path buggy_dir = scratch / "buggy";
  const fs::path pristine_dir = scratch / "pristine";

  enum class Offender { kFile, kTest };
  auto cleanup = [&] {
    std::error_code ec;
    if (own_scratch) {
      fs::remove_all(scratch, ec);
    } else {
      fs::remove_all(buggy_dir, ec);
      fs::remove_all(pristine_dir, ec);
    }
  };

  while (true) {
    materialize_checkout(host, buggy_dir, variant, /*injected=*/true);
    materialize_checkout(host, pristine_dir, variant, /*injected=*/false);

    Offender offender = Offender::kFile;
    std::string violation;
    std::string log;

    const ExecResult built =
        execute_build_test({variant.instance.build_cmd, buggy_dir, options.timeout_s});
    if (!built.ok()) {
      offender = Offender::kFile;
      violation = "defective version does not build";
      log = run_log(built);
    } else {
      const ExecResult buggy_run =
          execute_build_test({variant.instance.test_cmd, buggy_dir, options.timeout_s});
      if (buggy_run.timed_out) {
        offender = Offender::kTest;
        violation = "test timed out on the defective version";
        log = run_log(buggy_run);
      } else if (buggy_run.ok()) {
        offender = Offender::kTest;
        violation = "test passed on the defective version; it must fail";
        log = run_log(buggy_run);
      } else {
        const ExecResult pristine_build = execute_build_test(
            {variant.instance.build_cmd, pristine_dir, options.timeout_s});
        if (!pristine_build.ok()) {
          variant.status = InjectStatus::kRejected;
          variant.rejection_reason =
              "pristine host does not build: " + run_log(pristine_build);
          variant.history.push_back("rejected: pristine host build failed");
          cleanup();
          return;
        }
        const ExecResult pristine_run = execute_build_test(
            {variant.instance.test_cmd, pristine_dir, options.timeout_s});
        if (!pristine_run.ok()) {
          offender = Offender::kTest;
          violation = "test failed on the pristine version; it must pass";
          log = run_log(pristine_run);
        } else {
          variant.status = InjectStatus::kVerified;
          variant.history.push_back("verified after " +
                                    std::to_string(variant.refine_iterations) +
                                    " refinement(s)");
          cleanup();
          return;
        }
      }
    }

    variant.history.push_back(violation);
    if (variant.refine_iterations >= options.max_iters) {
      variant.status = InjectStatus::kRejected;
      variant.rejection_reason = violation + "; refinement budget exhausted\n" + log;
      variant.history.push_back("rejected: refinement budget exhausted");
      cleanup();
      return;
    }

    std::string* part = offender == Offender::kFile ? &variant.injected_file_text
                                                    : &variant.test_source;
    const char* template_id =
        offender == Offender::kFile ? "refine.compile" : "refine.test";
    bool refined = false;
    for (int attempt = 0; attempt < 3; ++attempt) {
      CompletionRequest request;
      request.template_id = template_id;
      std::string context = violation + "\n" + log;
      if (attempt > 0) context += "\n(retry " + std::to_string(attempt) + ")";
      request.slots = {{"log", context}, {"source", *part}};
      const auto replacement =
          extract_section(gateway.complete(request), "<<<SOURCE>>>");
      if (!replacement) {
        variant.history.push_back("malformed refinement, re-asked");
        continue;
      }
      if (offender == Offender::kFile) {
        const std::string confinement = confinement_violation(
            original, *replacement, candidate.function_name, profile);
        if (!confinement.empty()) {
          variant.status = InjectStatus::kRejected;
          variant.rejection_reason = "refined file " + confinement;
          variant.history.push_back("rejected: " + variant.rejection_reason);
          cleanup();
          return;
        }
      }
      *part = *replacement;
      refined = true;
      break;
    }
    if (!refined) {
      variant.status = InjectStatus::kRejected;
      variant.rejection_reason = "refinement responses stayed malformed";
      variant.history.push_back("rejected: " + variant.rejection_reason);
      cleanup();
      return;
    }
    variant.refine_iterations += 1;
    variant.history.push_back("refined " +
                              std::string(offender == Offender::kFile ? "source file" : "test") +
                              " (iteration " + std::to_string(variant.refine_iterations) + ")");
  }
}

namespace {

json origin_to_json(const InjectedVariant& variant) {
  json doc;
  doc["parent_id"] = variant.clone_origin.parent_id;
  doc["repo"] = variant.clone_origin.repo;
  doc["path"] = variant.clone_origin.path.generic_string();
  doc["function"] = variant.clone_origin.function_name;
  doc["refine_iterations"] = variant.refine_iterations;
  doc["status"] = to_string(variant.status);
  doc["history"] = variant.history;
  return doc;
}

// Stages one verified variant as a {buggy, fixed, tests} tree: the host
// checkout twice (once with the injected file), added files routed to the
// tests/ slot when they live under tests/, otherwise into both trees.
void stage_variant(const fs::path& host, const fs::path& stage,
                   const InjectedVariant& variant) {
  for (const auto& rel : list_files(host)) {
    const std::string content = read_file(host / rel);
    write_file(stage / "buggy" / rel, content);
    write_file(stage / "fixed" / rel, content);
  }
  write_file(stage / "buggy" / variant.instance.buggy_file, variant.injected_file_text);

  std::map<fs::path, std::string> added = variant.scaffold_files;
  added[variant.test_file] = variant.test_source;
  for (const auto& [rel, content] : added) {
    if (!rel.empty() && rel.begin()->string() == "tests") {
      write_file(stage / "tests" / rel.lexically_relative("tests"), content);
    } else {
      write_file(stage / "buggy" / rel, content);
      write_file(stage / "fixed" / rel, content);
    }
  }
}

}  // namespace

InjectReport build_analyze_layer(Benchmark& benchmark, const fs::path& search_export,
                                 const fs::path& workspace, LlmGateway& gateway,
                                 const InjectOptions& options) {
  InjectReport report;
  report.ingest = ingest_clone_candidates(search_export, workspace, benchmark.profile);

  fs::path scratch = options.verify.scratch_dir;
  const bool own_scratch = scratch.empty();
  if (own_scratch) {
    scratch = fs::temp_directory_path() /
              ("layerbench-analyze-" + std::to_string(::getpid()));
  }

  for (const auto& candidate : report.ingest.candidates) {
    if (benchmark.find_bug(candidate.parent_id) == nullptr) {
      report.errors.push_back("candidate references unknown parent '" +
                              candidate.parent_id + "'");
    }
  }

  for (const BugInstance& bug : benchmark.bugs) {
    std::vector<const CloneCandidate*> candidates;
    for (const auto& candidate : report.ingest.candidates) {
      if (candidate.parent_id == bug.id) candidates.push_back(&candidate);
    }

    InjectYield yield;
    yield.parent_id = bug.id;
    yield.candidates = static_cast<int>(candidates.size());

    std::vector<InjectedVariant> verified;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      InjectVerifyOptions verify_options = options.verify;
      verify_options.scratch_dir = scratch / bug.id / std::to_string(i);

      InjectedVariant variant =
          inject_bug(*candidates[i], bug, gateway, workspace, benchmark.profile);
      if (variant.status == InjectStatus::kUnverified) {
        generate_tests(variant, bug, gateway, workspace, benchmark.profile);
      }
      if (variant.status == InjectStatus::kUnverified) {
        verify_refine(variant, gateway, workspace, benchmark.profile, verify_options);
      }
      if (variant.status == InjectStatus::kVerified) {
        verified.push_back(std::move(variant));
      } else {
        ++yield.rejected;
      }
    }
    yield.verified = static_cast<int>(verified.size());
    report.yields.push_back(yield);

    if (verified.empty()) {
      report.uncovered.push_back(bug.id);
      continue;
    }

    VariantSet set;
    set.parent_id = bug.id;
    set.layer = LayerTag::kAnalyze;
    for (std::size_t k = 0; k < verified.size(); ++k) {
      const InjectedVariant& injected = verified[k];
      const fs::path stage = scratch / "stage" / bug.id / std::to_string(k);
      stage_variant(mirror_of(workspace, injected.clone_origin.repo), stage, injected);

      Variant variant;
      variant.instance = injected.instance;
      variant.instance.root = stage;
      variant.transform.scheme = "inject";
      set.variants.push_back(std::move(variant));
    }

    try {
      register_variant_set(benchmark, std::move(set));
      const VariantSet* registered = benchmark.find_variant_set(LayerTag::kAnalyze, bug.id);
      for (std::size_t k = 0; k < verified.size() && registered != nullptr; ++k) {
        const Variant& variant =
            registered->variants[registered->variants.size() - verified.size() + k];
        write_file(variant.instance.root / "origin.json",
                   origin_to_json(verified[k]).dump(2) + "\n");
      }
      report.registered += static_cast<int>(verified.size());
    } catch (const Error& e) {
      report.errors.push_back(bug.id + ": " + std::string(e.what()));
    }
  }

  std::error_code ec;
  fs::remove_all(scratch, ec);
  return report;
}

}  // namespace layerbench
