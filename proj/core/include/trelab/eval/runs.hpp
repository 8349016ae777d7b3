// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace trelab::eval {

struct Run {
  std::uint64_t seed = 0;
  double validation_f1 = 0.0;
  double test_f1 = 0.0;
};

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // population
};

MeanStd mean_std(std::span<const double> values);

struct RunSelection {
  std::size_t index = 0;
  Run selected;
  MeanStd test;
};

// Picks the run holding the median validation F1. Runs are ranked by
// validation F1 with ties kept in input order, and the run at rank
// (n-1)/2 is selected, so an even count takes the lower median.
// An empty set is an InputError.
RunSelection median_run_selection(std::span<const Run> runs);

}  // namespace trelab::eval
