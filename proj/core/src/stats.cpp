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

#include "layerbench/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "layerbench/error.hpp"

namespace layerbench {
namespace {

// Exact C(n, k); n stays below 25 on the exact branch, far within range.
double binomial_coefficient(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  unsigned long long result = 1;
  for (int i = 1; i <= k; ++i) {
    result = result * (unsigned long long)(n - k + i) / (unsigned long long)i;
  }
  return double(result);
}

double chi_square_survival_df1(double x) {
  // P(X >= x) for chi-square with one degree of freedom.
  return std::erfc(std::sqrt(x / 2.0));
}

}  // namespace

std::string to_string(FixClass cls) {
  switch (cls) {
    case FixClass::kFix0: return "FIX_0";
    case FixClass::kFix1: return "FIX_1";
    case FixClass::kFixPlus: return "FIX_+";
    case FixClass::kFixAll: return "FIX_ALL";
  }
  return "FIX_0";
}

FixClass classify_fix(const std::vector<bool>& solved) {
  if (solved.empty()) {
    throw Error(kErrStats, "cannot classify an empty verdict vector");
  }
  std::size_t k = std::size_t(std::count(solved.begin(), solved.end(), true));
  if (k == 0) return FixClass::kFix0;
  if (k == solved.size()) return FixClass::kFixAll;
  if (k == 1) return FixClass::kFix1;
  return FixClass::kFixPlus;
}

std::vector<bool> bug_level_solved(const SolveMatrix& matrix) {
  std::vector<bool> out;
  out.reserve(matrix.rows.size());
  bool by_class = matrix.layer == LayerTag::kUnderstand ||
                  matrix.layer == LayerTag::kAnalyze;
  for (const auto& row : matrix.rows) {
    FixClass cls = classify_fix(row);
    if (by_class) {
      out.push_back(cls == FixClass::kFixPlus || cls == FixClass::kFixAll);
    } else {
      out.push_back(std::find(row.begin(), row.end(), true) != row.end());
    }
  }
  return out;
}

LayerReport aggregate_layer(const SolveMatrix& matrix) {
  if (matrix.rows.empty()) {
    throw Error(kErrStats, "empty solve matrix for " + matrix.config_id);
  }
  LayerReport report;
  report.config_id = matrix.config_id;
  report.layer = matrix.layer;
  report.total_bugs = int(matrix.rows.size());
  for (const auto& row : matrix.rows) {
    ++report.class_distribution[classify_fix(row)];
  }
  for (bool solved : bug_level_solved(matrix)) {
    if (solved) ++report.solved_bugs;
  }
  report.percent = 100.0 * report.solved_bugs / report.total_bugs;
  return report;
}

McNemarResult mcnemar(int b, int c) {
  if (b < 0 || c < 0) {
    throw Error(kErrStats, "discordant counts must be non-negative");
  }
  McNemarResult result;
  result.b = b;
  result.c = c;
  int n = b + c;
  if (n < 25) {
    result.method = "exact";
    if (n == 0) {
      result.p_value = 1.0;
      return result;
    }
    double tail = 0.0;
    int m = std::min(b, c);
    for (int k = 0; k <= m; ++k) {
      tail += binomial_coefficient(n, k);
    }
    result.p_value = std::min(1.0, 2.0 * tail * std::ldexp(1.0, -n));
    return result;
  }
  result.method = "chi_square";
  double diff = std::abs(double(b) - double(c)) - 1.0;
  result.statistic = diff * diff / double(n);
  result.p_value = chi_square_survival_df1(result.statistic);
  return result;
}

McNemarResult mcnemar_paired(const std::vector<bool>& base,
                             const std::vector<bool>& other) {
  if (base.size() != other.size()) {
    throw Error(kErrStats, "paired vectors differ in length: " +
                               std::to_string(base.size()) + " vs " +
                               std::to_string(other.size()));
  }
  int b = 0, c = 0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (base[i] && !other[i]) ++b;
    if (!base[i] && other[i]) ++c;
  }
  return mcnemar(b, c);
}

DeltaCell cross_layer_delta(double base, double other) {
  DeltaCell cell;
  if (base == 0.0) {
    cell.undefined = true;
    return cell;
  }
  cell.relative_change_percent = 100.0 * (other - base) / base;
  return cell;
}

std::string format_percent(double value) {
  // Half-up, away from zero, at the second decimal.
  double magnitude = std::floor(std::abs(value) * 100.0 + 0.5) / 100.0;
  double rounded = value < 0 ? -magnitude : magnitude;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", rounded);
  // snprintf re-rounds the (already exact-to-2-decimals) value; with the
  // explicit rounding above the printed digits cannot drift.
  return buf;
}

}  // namespace layerbench
