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

#include <cmath>
#include <random>

#include "doctest.h"
#include "layerbench/error.hpp"
#include "oracles.hpp"

using namespace layerbench;

TEST_CASE("classify_fix spot checks") {
  CHECK(classify_fix({false}) == FixClass::kFix0);
  CHECK(classify_fix({true}) == FixClass::kFixAll);  // ALL wins over FIX_1
  CHECK(classify_fix({true, false, false}) == FixClass::kFix1);
  CHECK(classify_fix({true, true, false}) == FixClass::kFixPlus);
  CHECK(classify_fix({true, true, true}) == FixClass::kFixAll);
  CHECK_THROWS_AS(classify_fix({}), Error);
}

TEST_CASE("classify_fix matches the popcount oracle on every vector up to length 6") {
  for (int len = 1; len <= 6; ++len) {
    for (unsigned bits = 0; bits < (1u << len); ++bits) {
      std::vector<bool> solved;
      for (int i = 0; i < len; ++i) solved.push_back((bits >> i) & 1);
      CAPTURE(len);
      CAPTURE(bits);
      CHECK(to_string(classify_fix(solved)) == testing::oracle_fix_class(solved));
    }
  }
}

TEST_CASE("mcnemar exact spot values") {
  McNemarResult zero = mcnemar(0, 0);
  CHECK(zero.method == "exact");
  CHECK(zero.p_value == doctest::Approx(1.0).epsilon(1e-12));

  McNemarResult small = mcnemar(1, 5);
  CHECK(small.method == "exact");
  CHECK(small.p_value == doctest::Approx(0.21875).epsilon(1e-12));

  // Symmetry in the discordant counts.
  CHECK(mcnemar(5, 1).p_value == doctest::Approx(small.p_value).epsilon(1e-12));
}

TEST_CASE("mcnemar switches method at 25 discordant pairs") {
  CHECK(mcnemar(12, 12).method == "exact");
  CHECK(mcnemar(13, 12).method == "chi_square");
}

TEST_CASE("mcnemar chi-square spot value") {
  McNemarResult result = mcnemar(30, 10);
  CHECK(result.method == "chi_square");
  CHECK(result.statistic == doctest::Approx(9.025).epsilon(1e-12));
  CHECK(result.p_value == doctest::Approx(0.0026631).epsilon(1e-4));
}

TEST_CASE("mcnemar agrees with independent oracles on random counts") {
  std::mt19937 rng(424242);
  for (int round = 0; round < 100; ++round) {
    int b = int(rng() % 40);
    int c = int(rng() % 40);
    CAPTURE(b);
    CAPTURE(c);
    McNemarResult result = mcnemar(b, c);
    if (result.method == "exact") {
      double expected = testing::oracle_binomial_two_sided(b, c);
      CHECK(std::fabs(result.p_value - expected) < 1e-9);
    } else {
      double expected = testing::oracle_chi_square_survival_df1(result.statistic);
      CHECK(std::fabs(result.p_value - expected) < 1e-6);
    }
  }
}

TEST_CASE("mcnemar_paired counts discordant pairs") {
  std::vector<bool> base = {true, true, false, false, true};
  std::vector<bool> other = {true, false, true, false, false};
  McNemarResult result = mcnemar_paired(base, other);
  CHECK(result.b == 2);
  CHECK(result.c == 1);
  CHECK_THROWS_AS(mcnemar_paired({true}, {true, false}), Error);
}

TEST_CASE("aggregate_layer on single-variant layers") {
  SolveMatrix matrix;
  matrix.config_id = "sue/model/remember/none";
  matrix.layer = LayerTag::kRemember;
  for (int i = 0; i < 217; ++i) {
    matrix.bug_ids.push_back("B-" + std::to_string(i));
    matrix.rows.push_back({i < 177});
  }
  LayerReport report = aggregate_layer(matrix);
  CHECK(report.total_bugs == 217);
  CHECK(report.solved_bugs == 177);
  CHECK(std::fabs(report.percent - 81.57) <= 0.005);
  CHECK(report.class_distribution[FixClass::kFixAll] == 177);
  CHECK(report.class_distribution[FixClass::kFix0] == 40);

  for (auto& row : matrix.rows) row = {false};
  for (int i = 0; i < 117; ++i) matrix.rows[i] = {true};
  CHECK(std::fabs(aggregate_layer(matrix).percent - 53.92) <= 0.005);
}

TEST_CASE("aggregate_layer counts multi-fix bugs on variant layers") {
  SolveMatrix matrix;
  matrix.config_id = "sue/model/understand/none";
  matrix.layer = LayerTag::kUnderstand;
  matrix.bug_ids = {"A", "B", "C", "D"};
  matrix.rows = {{true, true},    // FIX_ALL -> solved
                 {true, false},   // FIX_1 -> not solved at this layer
                 {false, false},  // FIX_0
                 {true, true, false}};  // FIX_+ -> solved
  LayerReport report = aggregate_layer(matrix);
  CHECK(report.total_bugs == 4);
  CHECK(report.solved_bugs == 2);
  CHECK(report.class_distribution[FixClass::kFix1] == 1);
  CHECK(report.class_distribution[FixClass::kFixPlus] == 1);

  CHECK(bug_level_solved(matrix) == std::vector<bool>{true, false, false, true});
  matrix.layer = LayerTag::kApply;
  CHECK(bug_level_solved(matrix) == std::vector<bool>{true, true, false, true});

  SolveMatrix empty;
  CHECK_THROWS_AS(aggregate_layer(empty), Error);
}

TEST_CASE("cross_layer_delta") {
  DeltaCell cell = cross_layer_delta(68.66, 24.88);
  CHECK_FALSE(cell.undefined);
  CHECK(std::fabs(cell.relative_change_percent - (-63.76)) <= 0.01);

  DeltaCell up = cross_layer_delta(50.0, 75.0);
  CHECK(up.relative_change_percent == doctest::Approx(50.0));

  DeltaCell undefined = cross_layer_delta(0.0, 10.0);
  CHECK(undefined.undefined);
}

TEST_CASE("format_percent rounds half up away from zero") {
  CHECK(format_percent(81.5668) == "81.57");
  CHECK(format_percent(53.9171) == "53.92");
  CHECK(format_percent(-63.7635) == "-63.76");
  CHECK(format_percent(0.125) == "0.13");
  CHECK(format_percent(-0.125) == "-0.13");
  CHECK(format_percent(2.0) == "2.00");
  CHECK(format_percent(99.996) == "100.00");
}
