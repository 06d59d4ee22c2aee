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

// Independent reference implementations used only to cross-check the
// library. They deliberately avoid the library's own code paths: the
// binomial tail uses Pascal's triangle in integer arithmetic, and the
// chi-square tail integrates the normal density instead of calling erfc.

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace layerbench::testing {

// Two-sided exact binomial(n, 1/2) p-value from Pascal's triangle.
inline double oracle_binomial_two_sided(int b, int c) {
  int n = b + c;
  if (n == 0) return 1.0;
  std::vector<std::vector<std::uint64_t>> pascal(n + 1);
  for (int row = 0; row <= n; ++row) {
    pascal[row].assign(row + 1, 1);
    for (int k = 1; k < row; ++k) {
      pascal[row][k] = pascal[row - 1][k - 1] + pascal[row - 1][k];
    }
  }
  long double tail = 0.0L;
  int m = b < c ? b : c;
  for (int k = 0; k <= m; ++k) tail += (long double)pascal[n][k];
  long double p = 2.0L * tail / std::pow(2.0L, n);
  return p > 1.0L ? 1.0 : double(p);
}

// P(X >= x) for chi-square df=1, via the identity with the standard normal
// tail and adaptive Simpson integration of the density.
inline double oracle_chi_square_survival_df1(double x) {
  if (x <= 0.0) return 1.0;
  auto phi = [](double u) {
    return std::exp(-u * u / 2.0) / std::sqrt(2.0 * M_PI);
  };
  std::function<double(double, double, double, double, double, double)> simpson =
      [&](double a, double b2, double fa, double fb, double fm, double whole) -> double {
    double m = (a + b2) / 2.0;
    double lm = (a + m) / 2.0, rm = (m + b2) / 2.0;
    double flm = phi(lm), frm = phi(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b2 - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (std::fabs(left + right - whole) < 1e-13) return left + right;
    return simpson(a, m, fa, fm, flm, left) + simpson(m, b2, fm, fb, frm, right);
  };
  double s = std::sqrt(x);
  double hi = s + 42.0;  // the density beyond is far below any tolerance
  double fa = phi(s), fb = phi(hi), fm = phi((s + hi) / 2.0);
  double whole = (hi - s) / 6.0 * (fa + 4.0 * fm + fb);
  double tail = simpson(s, hi, fa, fb, fm, whole);
  return 2.0 * tail;
}

// Popcount-based reference for the FIX classes.
inline std::string oracle_fix_class(const std::vector<bool>& solved) {
  int k = 0;
  for (bool s : solved) k += s ? 1 : 0;
  if (k == 0) return "FIX_0";
  if (k == int(solved.size())) return "FIX_ALL";
  if (k == 1) return "FIX_1";
  return "FIX_+";
}

}  // namespace layerbench::testing
