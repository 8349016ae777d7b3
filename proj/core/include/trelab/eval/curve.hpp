// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "trelab/data/dataset.hpp"

namespace trelab::eval {

struct CurvePoint {
  double ratio = 0.0;
  std::uint64_t seed = 0;
  double f1 = 0.0;
};

struct CurveMean {
  double ratio = 0.0;
  double mean_f1 = 0.0;
};

// Trains on a subsample and returns its validation F1.
using CurveTrainer = std::function<double(const data::Dataset& subsample, std::uint64_t seed)>;

// Ratios must be strictly ascending within (0, 1]; otherwise a ConfigError.
void check_ratios(std::span<const double> ratios);
std::vector<double> parse_ratios(const std::string& text);

// For each ratio and seed base_seed + k (k < n_seeds): stratified subsample
// with that seed, then `train`. Rows are ordered by ratio, then seed.
std::vector<CurvePoint> sample_efficiency_curve(const data::Dataset& train, std::span<const double> ratios,
                                                std::size_t n_seeds, std::uint64_t base_seed,
                                                const CurveTrainer& trainer);

std::vector<CurveMean> curve_means(std::span<const CurvePoint> points);
// "ratio,seed,f1" header plus one row per point.
std::string curve_csv(std::span<const CurvePoint> points);
// Standalone SVG line chart of mean F1 against ratio, with per-seed dots.
std::string curve_svg(std::span<const CurvePoint> points);

}  // namespace trelab::eval
