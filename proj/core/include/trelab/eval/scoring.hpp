// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trelab/data/dataset.hpp"

namespace trelab::eval {

struct Counts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  friend bool operator==(const Counts&, const Counts&) = default;
};

// Precision, recall and F1 as fractions. Undefined ratios are reported as 0.
struct ScoreReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Per positive label (micro) or per undirected relation type (macro).
  std::map<std::string, Counts> per_class;

  Counts total() const;
};

double f1_score(double precision, double recall);

// Pooled counts over every label except `negative`: a prediction is a true
// positive when it equals a positive gold label. Length mismatch: InputError.
ScoreReport micro_f1_tacred(std::span<const std::string> gold, std::span<const std::string> pred,
                            std::string_view negative = data::kNoRelation);

// Exact-match counts per directed label, summed over the two directions of
// each relation type; F1, precision and recall are averaged over the types
// that occur in gold or predictions, Other excluded. Labels outside the 19
// directed classes are an InputError.
ScoreReport macro_f1_semeval_directed(std::span<const std::string> gold, std::span<const std::string> pred);

// The convention of the dataset format.
ScoreReport score(data::DatasetFormat format, std::span<const std::string> gold, std::span<const std::string> pred,
                  std::string_view negative = data::kNoRelation);

// `gold\tpred` lines.
std::string format_predictions(std::span<const std::string> gold, std::span<const std::string> pred);
void parse_predictions(std::string_view text, std::vector<std::string>& gold, std::vector<std::string>& pred);

std::string to_json(const ScoreReport& report);

}  // namespace trelab::eval
