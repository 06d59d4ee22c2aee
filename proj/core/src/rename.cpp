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

#include "layerbench/rename.hpp"

#include <algorithm>
#include <sstream>

#include "layerbench/callsite.hpp"
#include "layerbench/error.hpp"
#include "layerbench/fs_util.hpp"
#include "layerbench/llm.hpp"
#include "layerbench/sha256.hpp"

namespace layerbench {

RenameTargets rename_targets_from_string(const std::string& name) {
  if (name == "vars") return RenameTargets::kVars;
  if (name == "funcs") return RenameTargets::kFuncs;
  if (name == "both") return RenameTargets::kBoth;
  throw Error(kErrBadArgs, "unknown rename targets: " + name);
}

std::string to_string(RenameTargets targets) {
  switch (targets) {
    case RenameTargets::kVars: return "vars";
    case RenameTargets::kFuncs: return "funcs";
    case RenameTargets::kBoth: return "both";
  }
  throw Error(kErrInternal, "bad rename targets value");
}

std::string hash_identifier(const std::string& name, bool is_function,
                            uint64_t clock_stamp, const SubjectProfile& profile,
                            const std::set<std::string>& taken) {
  const std::string prefix = is_function ? "f_" : "v_";
  const std::string base = name + "|" + std::to_string(clock_stamp);
  std::string material = base;
  for (int salt = 1;; ++salt) {
    const std::string candidate = prefix + sha256_hex(material).substr(0, 16);
    if (!profile.is_keyword(candidate) && taken.count(candidate) == 0) {
      return candidate;
    }
    material = base + "|" + std::to_string(salt);
  }
}

RenamePlan build_hash_plan(const std::vector<RenameCandidate>& candidates,
                           RenameTargets targets, uint64_t clock_stamp,
                           const SubjectProfile& profile,
                           const std::set<std::string>& reserved) {
  RenamePlan plan;
  plan.scheme = "hash";
  plan.targets = targets;
  plan.clock_stamp = clock_stamp;

  std::set<std::string> taken = reserved;
  for (const auto& candidate : candidates) {
    taken.insert(candidate.name);
  }
  for (const auto& candidate : candidates) {
    if (plan.mapping.count(candidate.name) != 0) {
      throw Error(kErrBadArgs, "duplicate rename candidate: " + candidate.name);
    }
    const std::string fresh =
        hash_identifier(candidate.name, candidate.is_function, clock_stamp, profile, taken);
    plan.mapping[candidate.name] = fresh;
    taken.insert(fresh);
  }
  return plan;
}

namespace {

// Parses "old -> new" proposal lines into a map; lines that do not match the
// shape are ignored so prose around the list is harmless.
std::map<std::string, std::string> parse_proposals(const std::string& response) {
  std::map<std::string, std::string> out;
  std::istringstream lines(response);
  std::string line;
  while (std::getline(lines, line)) {
    const auto arrow = line.find("->");
    if (arrow == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto first = s.find_first_not_of(" \t\r");
      const auto last = s.find_last_not_of(" \t\r");
      if (first == std::string::npos) return std::string();
      return s.substr(first, last - first + 1);
    };
    const std::string old_name = trim(line.substr(0, arrow));
    const std::string new_name = trim(line.substr(arrow + 2));
    if (!old_name.empty() && !new_name.empty()) {
      out[old_name] = new_name;
    }
  }
  return out;
}

// Returns an empty string when the proposal is acceptable, otherwise a
// description of the first violation for the follow-up request.
std::string validate_proposal(const std::vector<RenameCandidate>& candidates,
                              const std::map<std::string, std::string>& proposal,
                              const SubjectProfile& profile,
                              const std::set<std::string>& reserved) {
  std::set<std::string> seen;
  for (const auto& candidate : candidates) {
    auto it = proposal.find(candidate.name);
    if (it == proposal.end()) {
      return "no replacement was proposed for '" + candidate.name + "'";
    }
    const std::string& fresh = it->second;
    if (!is_valid_identifier(fresh, profile)) {
      return "'" + fresh + "' is not a valid identifier";
    }
    if (profile.is_keyword(fresh)) {
      return "'" + fresh + "' is a language keyword";
    }
    if (fresh == candidate.name) {
      return "'" + candidate.name + "' was not changed";
    }
    if (reserved.count(fresh) != 0) {
      return "'" + fresh + "' collides with a name already visible in the code";
    }
    if (!seen.insert(fresh).second) {
      return "'" + fresh + "' was proposed for more than one identifier";
    }
  }
  return "";
}

}  // namespace

RenamePlan build_rephrase_plan(const std::vector<RenameCandidate>& candidates,
                               RenameTargets targets, uint64_t clock_stamp,
                               const SubjectProfile& profile,
                               const std::set<std::string>& reserved,
                               LlmGateway& gateway, const std::string& function_name,
                               const std::string& function_text, int max_rounds) {
  std::set<std::string> forbidden = reserved;
  for (const auto& candidate : candidates) {
    forbidden.insert(candidate.name);
  }

  std::string names;
  for (const auto& candidate : candidates) {
    names += candidate.name;
    names += '\n';
  }

  std::string last_violation;
  for (int round = 0; round < max_rounds; ++round) {
    std::string context = function_text;
    if (!last_violation.empty()) {
      // Carrying the violation and the attempt number into the prompt changes
      // the cache key, so a retry is a genuinely new request rather than a
      // cache hit on the rejected answer.
      context += "\n\nA previous proposal was rejected: " + last_violation +
                 ". This is attempt " + std::to_string(round + 1) + ".";
    }
    const std::string response = gateway.complete(
        {"apply.rephrase.names",
         {{"function_name", function_name}, {"function_text", context}, {"names", names}}});
    const auto proposal = parse_proposals(response);
    last_violation = validate_proposal(candidates, proposal, profile, forbidden);
    if (last_violation.empty()) {
      RenamePlan plan;
      plan.scheme = "rephrase";
      plan.targets = targets;
      plan.clock_stamp = clock_stamp;
      for (const auto& candidate : candidates) {
        plan.mapping[candidate.name] = proposal.at(candidate.name);
      }
      return plan;
    }
  }
  throw Error(kErrRenameIncomplete, "no acceptable proposal after " +
                                        std::to_string(max_rounds) +
                                        " rounds: " + last_violation);
}

std::vector<RenameCandidate> rename_candidates(const ScopeMap& scope, RenameTargets targets) {
  std::vector<RenameCandidate> candidates;
  if (targets == RenameTargets::kVars || targets == RenameTargets::kBoth) {
    for (const auto& named : scope.params) {
      candidates.push_back({named.name, false});
    }
    for (const auto& named : scope.locals) {
      candidates.push_back({named.name, false});
    }
  }
  if (targets == RenameTargets::kFuncs || targets == RenameTargets::kBoth) {
    candidates.push_back({scope.function_name, true});
  }
  return candidates;
}

namespace {

std::set<std::string> scope_reserved(const ScopeMap& scope,
                                     const std::set<std::string>& extra_reserved) {
  std::set<std::string> reserved = extra_reserved;
  reserved.insert(scope.free_names.begin(), scope.free_names.end());
  reserved.insert(scope.function_name);
  for (const auto& named : scope.params) reserved.insert(named.name);
  for (const auto& named : scope.locals) reserved.insert(named.name);
  return reserved;
}

}  // namespace

RenamePlan hash_rename_plan(const ScopeMap& scope, RenameTargets targets,
                            uint64_t clock_stamp, const SubjectProfile& profile,
                            const std::set<std::string>& extra_reserved) {
  return build_hash_plan(rename_candidates(scope, targets), targets, clock_stamp, profile,
                         scope_reserved(scope, extra_reserved));
}

RenamePlan rephrase_rename_plan(const std::string& function_source, const ScopeMap& scope,
                                RenameTargets targets, uint64_t clock_stamp,
                                const SubjectProfile& profile, LlmGateway& gateway,
                                const std::set<std::string>& extra_reserved, int max_rounds) {
  return build_rephrase_plan(rename_candidates(scope, targets), targets, clock_stamp, profile,
                             scope_reserved(scope, extra_reserved), gateway,
                             scope.function_name, function_source, max_rounds);
}

std::string apply_text_edits(const std::string& text, std::vector<TextEdit> edits) {
  std::sort(edits.begin(), edits.end(),
            [](const TextEdit& a, const TextEdit& b) { return a.span.begin < b.span.begin; });
  for (size_t i = 0; i + 1 < edits.size(); ++i) {
    if (edits[i].span.end > edits[i + 1].span.begin) {
      throw Error(kErrRenameOverlap,
                  "edits overlap at bytes " + std::to_string(edits[i + 1].span.begin) + ".." +
                      std::to_string(edits[i].span.end));
    }
  }
  if (!edits.empty() && edits.back().span.end > text.size()) {
    throw Error(kErrRenameOverlap, "edit extends past end of text");
  }

  std::string out;
  out.reserve(text.size());
  size_t pos = 0;
  for (const auto& edit : edits) {
    out.append(text, pos, edit.span.begin - pos);
    out += edit.replacement;
    pos = edit.span.end;
  }
  out.append(text, pos, text.npos);
  return out;
}

std::string rename_in_function(const std::string& text, const std::string& function_name,
                               const std::map<std::string, std::string>& mapping,
                               const SubjectProfile& profile) {
  const ScopeMap scope = resolve_function_scope(text, profile, function_name);
  std::vector<TextEdit> edits;
  for (const auto& named : scope.params) {
    auto it = mapping.find(named.name);
    if (it == mapping.end()) continue;
    for (const auto& span : named.occurrences) {
      edits.push_back({span, it->second});
    }
  }
  for (const auto& named : scope.locals) {
    auto it = mapping.find(named.name);
    if (it == mapping.end()) continue;
    for (const auto& span : named.occurrences) {
      edits.push_back({span, it->second});
    }
  }
  return apply_text_edits(text, std::move(edits));
}

int rename_function_everywhere(const std::filesystem::path& root,
                               const std::string& old_name, const std::string& new_name,
                               const SubjectProfile& profile) {
  const CallSiteIndex index = index_call_sites(root, profile, old_name);

  std::map<std::filesystem::path, std::vector<TextEdit>> edits_by_file;
  for (const auto& site : index.sites) {
    edits_by_file[site.file].push_back({site.name_span, new_name});
  }
  for (const auto& def : index.definitions) {
    edits_by_file[def.file].push_back({def.name_span, new_name});
  }

  int rewritten = 0;
  std::vector<std::pair<std::filesystem::path, std::string>> outputs;
  for (auto& [file, edits] : edits_by_file) {
    rewritten += static_cast<int>(edits.size());
    const std::string text = read_file(root / file);
    outputs.emplace_back(root / file, apply_text_edits(text, std::move(edits)));
  }
  for (const auto& [path, content] : outputs) {
    write_file(path, content);
  }
  return rewritten;
}

int apply_rename(const std::filesystem::path& project_root, const RenamePlan& plan,
                 const ScopeMap& scope, const CallSiteIndex& calls,
                 const SubjectProfile& profile) {
  const auto function_entry = plan.mapping.find(scope.function_name);
  const bool touches_function = function_entry != plan.mapping.end();

  if (touches_function && calls.hazards.any()) {
    std::string reasons;
    if (calls.hazards.overloaded) reasons += " overloaded";
    if (calls.hazards.overridden_or_inherited) reasons += " defined-in-multiple-files";
    if (calls.hazards.reflective_or_string_refs) reasons += " referenced-in-string-literals";
    throw Error(kErrHazard, "cannot rename function " + scope.function_name + ":" + reasons);
  }

  int rewritten = 0;

  // Variables first: their spans live inside the function body, and the
  // function rename below re-tokenizes files itself, so ordering this way
  // keeps every span valid when it is applied.
  std::map<std::string, std::string> var_mapping;
  for (const auto& [old_name, new_name] : plan.mapping) {
    if (old_name != scope.function_name) {
      var_mapping.emplace(old_name, new_name);
    }
  }
  if (!var_mapping.empty()) {
    const std::filesystem::path target = project_root / scope.file;
    const std::string before = read_file(target);
    const std::string after = rename_in_function(before, scope.function_name, var_mapping, profile);
    if (after != before) {
      write_file(target, after);
    }
    // Count rewritten occurrences from the caller's scope, which was
    // resolved against the same file content.
    for (const auto& named : scope.params) {
      if (var_mapping.count(named.name)) rewritten += static_cast<int>(named.occurrences.size());
    }
    for (const auto& named : scope.locals) {
      if (var_mapping.count(named.name)) rewritten += static_cast<int>(named.occurrences.size());
    }
  }

  if (touches_function) {
    rewritten += rename_function_everywhere(project_root, scope.function_name,
                                            function_entry->second, profile);
  }
  return rewritten;
}

}  // namespace layerbench
