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

#include "layerbench/apply_gen.hpp"

#include <unistd.h>

#include "layerbench/callsite.hpp"
#include "layerbench/comments.hpp"
#include "layerbench/error.hpp"
#include "layerbench/fs_util.hpp"
#include "layerbench/llm.hpp"
#include "layerbench/rename.hpp"

namespace layerbench {
namespace {

namespace fs = std::filesystem;

std::string hazard_reason(const Hazards& hazards) {
  std::string reason;
  auto add = [&reason](const char* piece) {
    if (!reason.empty()) reason += ", ";
    reason += piece;
  };
  if (hazards.overloaded) add("function is overloaded");
  if (hazards.overridden_or_inherited) add("function is defined in multiple files");
  if (hazards.reflective_or_string_refs) add("function name appears in string literals");
  return reason;
}

// Collects every identifier token in every source file under `root`; used as
// the reserved set so fresh names cannot collide with anything visible.
void collect_identifiers(const fs::path& root, const SubjectProfile& profile,
                         std::set<std::string>& out) {
  for (const auto& rel : list_files(root)) {
    if (!is_source_file(rel)) continue;
    std::vector<Token> tokens;
    try {
      tokens = tokenize(read_file(root / rel), profile);
    } catch (const Error&) {
      continue;  // unlexable files reserve nothing
    }
    for (const auto& token : tokens) {
      if (token.kind == TokenKind::kIdentifier) {
        out.insert(token.text);
      }
    }
  }
}

// Moves the non-test part of a worked checkout into the staging buggy/ or
// fixed/ slot, and (for the buggy side) the tests into tests/.
void split_checkout(const fs::path& work, const fs::path& stage_slot,
                    const fs::path* tests_slot) {
  for (const auto& rel : list_files(work)) {
    const bool is_test = !rel.empty() && rel.begin()->string() == "tests";
    if (is_test) {
      if (tests_slot != nullptr) {
        fs::path under_tests = rel.lexically_relative("tests");
        write_file(*tests_slot / under_tests, read_file(work / rel));
      }
    } else {
      write_file(stage_slot / rel, read_file(work / rel));
    }
  }
}

struct VariationResult {
  bool registered = false;
  std::string skip_reason;
};

VariationResult run_variation(Benchmark& benchmark, const BugInstance& bug,
                              const ApplyVariation& variation, const ApplyGenOptions& options,
                              LlmGateway* gateway, const fs::path& scratch) {
  const SubjectProfile& profile = benchmark.profile;
  VariationResult result;

  fs::remove_all(scratch);
  const fs::path buggy_work = scratch / "b";
  const fs::path fixed_work = scratch / "f";
  stage_checkout(bug, /*fixed=*/false, buggy_work);
  stage_checkout(bug, /*fixed=*/true, fixed_work);

  TransformDescriptor transform;
  transform.scheme = variation.scheme;
  transform.targets = variation.targets;
  transform.clock_stamp = static_cast<std::int64_t>(options.clock_stamp);

  std::string new_function_name = bug.function_name;

  if (variation.scheme == "comments") {
    const CommentMode mode = comment_mode_from_string(variation.targets);
    for (const fs::path& work : {buggy_work, fixed_work}) {
      const fs::path file = work / bug.buggy_file;
      write_file(file, perturb_comments(read_file(file), mode, profile));
    }
  } else if (variation.scheme == "hash" || variation.scheme == "rephrase") {
    const RenameTargets targets = rename_targets_from_string(variation.targets);

    const ScopeMap buggy_scope = resolve_function_scope(
        read_file(buggy_work / bug.buggy_file), profile, bug.function_name, bug.buggy_file);
    const ScopeMap fixed_scope = resolve_function_scope(
        read_file(fixed_work / bug.buggy_file), profile, bug.function_name, bug.buggy_file);

    const bool touches_function =
        targets == RenameTargets::kFuncs || targets == RenameTargets::kBoth;

    CallSiteIndex buggy_calls;
    CallSiteIndex fixed_calls;
    if (touches_function) {
      buggy_calls = index_call_sites(buggy_work, profile, bug.function_name);
      fixed_calls = index_call_sites(fixed_work, profile, bug.function_name);
      if (buggy_calls.hazards.any() || fixed_calls.hazards.any()) {
        result.skip_reason = hazard_reason(
            buggy_calls.hazards.any() ? buggy_calls.hazards : fixed_calls.hazards);
        return result;
      }
    }

    // Candidates from the buggy side first, then names only the fix declares,
    // so both checkouts rename consistently.
    std::vector<RenameCandidate> candidates = rename_candidates(buggy_scope, targets);
    std::set<std::string> seen;
    for (const auto& candidate : candidates) seen.insert(candidate.name);
    for (const auto& candidate : rename_candidates(fixed_scope, targets)) {
      if (seen.insert(candidate.name).second) {
        candidates.push_back(candidate);
      }
    }

    std::set<std::string> reserved;
    collect_identifiers(buggy_work, profile, reserved);
    collect_identifiers(fixed_work, profile, reserved);

    RenamePlan plan;
    if (variation.scheme == "hash") {
      plan = build_hash_plan(candidates, targets, options.clock_stamp, profile, reserved);
    } else {
      if (gateway == nullptr) {
        result.skip_reason = "rephrase requires an LLM gateway";
        return result;
      }
      plan = build_rephrase_plan(candidates, targets, options.clock_stamp, profile, reserved,
                                 *gateway, bug.function_name, bug.buggy_function.text,
                                 options.rephrase_rounds);
    }

    apply_rename(buggy_work, plan, buggy_scope, buggy_calls, profile);
    apply_rename(fixed_work, plan, fixed_scope, fixed_calls, profile);

    transform.rename_map = plan.mapping;
    if (touches_function) {
      new_function_name = plan.mapping.at(bug.function_name);
    }
  } else {
    result.skip_reason = "unknown scheme " + variation.scheme;
    return result;
  }

  const fs::path stage = scratch / "v";
  const fs::path tests_slot = stage / "tests";
  split_checkout(buggy_work, stage / "buggy", &tests_slot);
  split_checkout(fixed_work, stage / "fixed", nullptr);

  Variant variant;
  variant.instance = bug;
  variant.instance.function_name = new_function_name;
  variant.instance.root = stage;
  variant.transform = transform;

  VariantSet set;
  set.parent_id = bug.id;
  set.layer = LayerTag::kApply;
  set.variants.push_back(std::move(variant));
  register_variant_set(benchmark, std::move(set));

  result.registered = true;
  return result;
}

}  // namespace

std::vector<ApplyVariation> default_apply_variations() {
  return {
      {"hash", "vars"},     {"hash", "funcs"},     {"hash", "both"},
      {"rephrase", "vars"}, {"rephrase", "funcs"}, {"rephrase", "both"},
  };
}

ApplyGenReport generate_apply_layer(Benchmark& benchmark, const ApplyGenOptions& options,
                                    LlmGateway* gateway) {
  if (options.clock_stamp == 0) {
    throw Error(kErrBadArgs, "clock_stamp must be set for apply-layer generation");
  }

  fs::path scratch_root = options.scratch_dir;
  const bool own_scratch = scratch_root.empty();
  if (own_scratch) {
    scratch_root = fs::temp_directory_path() /
                   ("layerbench-apply-" + std::to_string(::getpid()));
  }

  ApplyGenReport report;
  for (const BugInstance& bug : benchmark.bugs) {
    for (const ApplyVariation& variation : options.variations) {
      const fs::path scratch = scratch_root / bug.id / (variation.scheme + "-" + variation.targets);
      VariationResult outcome;
      try {
        outcome = run_variation(benchmark, bug, variation, options, gateway, scratch);
      } catch (const Error& e) {
        outcome.skip_reason = e.what();
      }
      if (outcome.registered) {
        ++report.registered;
        ++report.variants_per_bug[bug.id];
      } else {
        ++report.excluded;
        report.exclusions.push_back({bug.id, variation.scheme, variation.targets,
                                     outcome.skip_reason});
      }
      std::error_code ec;
      fs::remove_all(scratch, ec);
    }
  }
  if (own_scratch) {
    std::error_code ec;
    fs::remove_all(scratch_root, ec);
  }
  return report;
}

}  // namespace layerbench
