//
// Copyright 2026 The fairaudit Authors
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
//

// Brute-force reference implementations used to cross-check the metrics
// module. They work from raw (gold, pred) pairs and share no code with it.

#ifndef FAIRAUDIT_TESTS_METRIC_ORACLES_H_
#define FAIRAUDIT_TESTS_METRIC_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace fairaudit::testing {

using Pairs = std::vector<std::pair<int, int>>;  // (gold, pred)

// Weighted F1 over classes 0..k-1, straight from the definition.
inline double OracleWeightedF1(const Pairs& pairs, int k) {
  double total = 0.0;
  double weighted = 0.0;
  for (int c = 0; c < k; ++c) {
    double tp = 0, fp = 0, fn = 0;
    for (const auto& [g, p] : pairs) {
      if (g == c && p == c) tp += 1;
      if (g != c && p == c) fp += 1;
      if (g == c && p != c) fn += 1;
    }
    const double support = tp + fn;
    const double precision = (tp + fp) > 0 ? tp / (tp + fp) : 0.0;
    const double recall = support > 0 ? tp / support : 0.0;
    const double f1 = (precision + recall) > 0
                          ? 2 * precision * recall / (precision + recall)
                          : 0.0;
    weighted += support * f1;
    total += support;
  }
  return total > 0 ? weighted / total : 0.0;
}

// Spread of a set of rates: |a - b| for two, population std otherwise,
// computed from mean pairwise squared differences.
inline std::optional<double> OracleSpread(const std::vector<double>& v) {
  const size_t n = v.size();
  if (n < 2) return std::nullopt;
  if (n == 2) return std::fabs(v[0] - v[1]);
  double s = 0.0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) s += (v[i] - v[j]) * (v[i] - v[j]);
  }
  return std::sqrt(s / (2.0 * static_cast<double>(n * n)));
}

// EO for one target class over groups of raw pairs (mean or max of the TPR
// and FPR spreads; undefined rates dropped per component).
inline std::optional<double> OracleEo(const std::vector<Pairs>& groups, int target,
                                      bool use_max = false) {
  std::vector<double> tprs;
  std::vector<double> fprs;
  for (const Pairs& g : groups) {
    double pos = 0, tp = 0, neg = 0, fp = 0;
    for (const auto& [gold, pred] : g) {
      if (gold == target) {
        pos += 1;
        if (pred == target) tp += 1;
      } else {
        neg += 1;
        if (pred == target) fp += 1;
      }
    }
    if (pos > 0) tprs.push_back(tp / pos);
    if (neg > 0) fprs.push_back(fp / neg);
  }
  const auto a = OracleSpread(tprs);
  const auto b = OracleSpread(fprs);
  if (a && b) return use_max ? std::max(*a, *b) : (*a + *b) / 2.0;
  if (a) return a;
  return b;
}

// Random pairs: up to max_n samples over k classes; pred may be -1.
inline Pairs RandomPairs(std::mt19937_64& rng, int k, int max_n, bool allow_none) {
  std::uniform_int_distribution<int> len(1, max_n);
  std::uniform_int_distribution<int> cls(allow_none ? -1 : 0, k - 1);
  std::uniform_int_distribution<int> gold(0, k - 1);
  Pairs out(static_cast<size_t>(len(rng)));
  for (auto& p : out) p = {gold(rng), cls(rng)};
  return out;
}

}  // namespace fairaudit::testing

#endif  // FAIRAUDIT_TESTS_METRIC_ORACLES_H_
