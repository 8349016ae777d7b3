// SPDX-License-Identifier: Apache-2.0
#include "trelab/eval/runs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "trelab/error.hpp"

namespace trelab::eval {

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw InputError("mean of an empty list");
  MeanStd out;
  const auto n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double sq = 0.0;
  for (double v : values) sq += (v - out.mean) * (v - out.mean);
  out.stddev = std::sqrt(sq / n);
  return out;
}

RunSelection median_run_selection(std::span<const Run> runs) {
  if (runs.empty()) throw InputError("median selection over no runs");
  std::vector<std::size_t> order(runs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return runs[a].validation_f1 < runs[b].validation_f1; });
  RunSelection out;
  out.index = order[(runs.size() - 1) / 2];
  out.selected = runs[out.index];
  std::vector<double> tests;
  for (const Run& r : runs) tests.push_back(r.test_f1);
  out.test = mean_std(tests);
  return out;
}

}  // namespace trelab::eval
