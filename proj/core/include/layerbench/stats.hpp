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

#include <map>
#include <string>
#include <vector>

#include "layerbench/corpus.hpp"

namespace layerbench {

// How many of a bug's variants a subject solved: none, exactly one, more
// than one but not all, or all of them.
enum class FixClass { kFix0, kFix1, kFixPlus, kFixAll };

std::string to_string(FixClass cls);

// Classification by solved count k over |solved| variants: k=0 -> FIX_0,
// k=|v| -> FIX_ALL (which wins over FIX_1 for single-variant sets), k=1 ->
// FIX_1, otherwise FIX_+. An empty vector is an error (E_STATS).
FixClass classify_fix(const std::vector<bool>& solved);

// Bug x variant boolean outcomes for one (subject, model, layer, scheme)
// configuration and one judgment metric.
struct SolveMatrix {
  std::string config_id;
  LayerTag layer = LayerTag::kRemember;
  std::vector<std::string> bug_ids;
  std::vector<std::vector<bool>> rows;  // parallel to bug_ids, all non-empty
};

struct LayerReport {
  std::string config_id;
  LayerTag layer = LayerTag::kRemember;
  int total_bugs = 0;
  int solved_bugs = 0;
  double percent = 0.0;  // 100 * solved_bugs / total_bugs
  std::map<FixClass, int> class_distribution;
};

// Per-bug "solved" verdicts under the layer's semantics: any variant solved
// for remember/apply; FIX_+ or FIX_ALL for understand/analyze.
std::vector<bool> bug_level_solved(const SolveMatrix& matrix);

// Collapses a matrix into the layer metric plus the full FIX distribution.
// An empty matrix or an empty row is an error (E_STATS).
LayerReport aggregate_layer(const SolveMatrix& matrix);

struct McNemarResult {
  int b = 0;  // solved by base only
  int c = 0;  // solved by other only
  std::string method;      // "exact" or "chi_square"
  double statistic = 0.0;  // continuity-corrected, chi_square only
  double p_value = 1.0;
};

// Paired McNemar test on the discordant counts. Fewer than 25 discordant
// pairs: exact two-sided binomial p = min(1, 2 * sum_{k<=min(b,c)}
// C(n,k)/2^n) with p=1 when n=0. Otherwise the continuity-corrected
// statistic (|b-c|-1)^2/(b+c) against chi-square with one degree of freedom.
McNemarResult mcnemar(int b, int c);

// Counts discordant pairs from two aligned per-bug verdict vectors.
// Error(E_STATS) if the lengths differ.
McNemarResult mcnemar_paired(const std::vector<bool>& base,
                             const std::vector<bool>& other);

struct DeltaCell {
  double relative_change_percent = 0.0;  // 100 * (other - base) / base
  bool undefined = false;                // base was zero
};

// Relative change between two percentages (or counts; any same-unit pair).
DeltaCell cross_layer_delta(double base, double other);

// Two-decimal half-up (away from zero) rendering: 81.5668 -> "81.57".
std::string format_percent(double value);

}  // namespace layerbench
