// SPDX-License-Identifier: Apache-2.0
#include "trelab/eval/scoring.hpp"

#include <algorithm>

#include <json.hpp>

#include "trelab/error.hpp"

namespace trelab::eval {
namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

void check_lengths(std::span<const std::string> gold, std::span<const std::string> pred) {
  if (gold.size() != pred.size()) {
    throw InputError("gold has " + std::to_string(gold.size()) + " labels, predictions " +
                     std::to_string(pred.size()));
  }
}

}  // namespace

Counts ScoreReport::total() const {
  Counts c;
  for (const auto& [label, k] : per_class) {
    c.tp += k.tp;
    c.fp += k.fp;
    c.fn += k.fn;
  }
  return c;
}

double f1_score(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

ScoreReport micro_f1_tacred(std::span<const std::string> gold, std::span<const std::string> pred,
                            std::string_view negative) {
  check_lengths(gold, pred);
  ScoreReport r;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const std::string& g = gold[i];
    const std::string& p = pred[i];
    if (g == p) {
      if (g != negative) ++r.per_class[g].tp;
      continue;
    }
    if (p != negative) ++r.per_class[p].fp;
    if (g != negative) ++r.per_class[g].fn;
  }
  const Counts c = r.total();
  r.precision = ratio(c.tp, c.tp + c.fp);
  r.recall = ratio(c.tp, c.tp + c.fn);
  r.f1 = f1_score(r.precision, r.recall);
  return r;
}

ScoreReport macro_f1_semeval_directed(std::span<const std::string> gold, std::span<const std::string> pred) {
  check_lengths(gold, pred);
  const auto known = data::semeval_labels();
  auto check = [&](const std::string& label) {
    if (std::find(known.begin(), known.end(), label) == known.end()) {
      throw InputError("'" + label + "' is not a SemEval label");
    }
  };
  ScoreReport r;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    check(gold[i]);
    check(pred[i]);
    const bool gold_real = gold[i] != data::kOther;
    const bool pred_real = pred[i] != data::kOther;
    if (gold[i] == pred[i]) {
      if (gold_real) ++r.per_class[data::semeval_relation_type(gold[i])].tp;
      continue;
    }
    if (pred_real) ++r.per_class[data::semeval_relation_type(pred[i])].fp;
    if (gold_real) ++r.per_class[data::semeval_relation_type(gold[i])].fn;
  }
  if (r.per_class.empty()) return r;
  for (const auto& [type, c] : r.per_class) {
    const double p = ratio(c.tp, c.tp + c.fp);
    const double q = ratio(c.tp, c.tp + c.fn);
    r.precision += p;
    r.recall += q;
    r.f1 += f1_score(p, q);
  }
  const auto n = static_cast<double>(r.per_class.size());
  r.precision /= n;
  r.recall /= n;
  r.f1 /= n;
  return r;
}

ScoreReport score(data::DatasetFormat format, std::span<const std::string> gold, std::span<const std::string> pred,
                  std::string_view negative) {
  return format == data::DatasetFormat::kSemEval ? macro_f1_semeval_directed(gold, pred)
                                                 : micro_f1_tacred(gold, pred, negative);
}

std::string format_predictions(std::span<const std::string> gold, std::span<const std::string> pred) {
  check_lengths(gold, pred);
  std::string out;
  for (std::size_t i = 0; i < gold.size(); ++i) out += gold[i] + '\t' + pred[i] + '\n';
  return out;
}

void parse_predictions(std::string_view text, std::vector<std::string>& gold, std::vector<std::string>& pred) {
  gold.clear();
  pred.clear();
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos) {
      throw ParseError("predictions line " + std::to_string(line_no) + ": expected 'gold<TAB>pred'");
    }
    gold.emplace_back(line.substr(0, tab));
    pred.emplace_back(line.substr(tab + 1));
  }
}

std::string to_json(const ScoreReport& report) {
  nlohmann::ordered_json j;
  j["precision"] = report.precision;
  j["recall"] = report.recall;
  j["f1"] = report.f1;
  nlohmann::ordered_json classes = nlohmann::ordered_json::object();
  for (const auto& [label, c] : report.per_class) classes[label] = {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}};
  j["per_class"] = std::move(classes);
  return j.dump(2);
}

}  // namespace trelab::eval
