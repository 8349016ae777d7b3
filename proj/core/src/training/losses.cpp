// SPDX-License-Identifier: Apache-2.0
#include "trelab/training/losses.hpp"

#include "trelab/error.hpp"

namespace trelab::training {

namespace ops = numerics;

namespace {

std::size_t counted(std::span<const int> targets) {
  std::size_t n = 0;
  for (int t : targets) n += t != data::kIgnoreTarget;
  return n;
}

// Adds `terms[i]` weighted by weights[i].
Var weighted_sum(const std::vector<Var>& terms, const std::vector<double>& weights) {
  Var total = ops::scale(terms[0], weights[0]);
  for (std::size_t i = 1; i < terms.size(); ++i) total = ops::add(total, ops::scale(terms[i], weights[i]));
  return total;
}

void check_example(const data::EncodedExample& ex, int classify_id, std::size_t n_relations) {
  if (ex.ids.empty() || ex.ids.back() != classify_id) {
    throw ContractError("relation input must end with the classify token");
  }
  if (ex.label_id < 0 || static_cast<std::size_t>(ex.label_id) >= n_relations) {
    throw IndexError("label id " + std::to_string(ex.label_id) + " outside a head of " +
                     std::to_string(n_relations) + " relations");
  }
}

}  // namespace

Var lm_loss(Tape& tape, Model& model, std::span<const std::vector<int>> batch, bool train, Rng& rng) {
  if (batch.empty()) throw InputError("language-model loss of an empty batch");
  std::vector<Var> terms;
  std::vector<double> weights;
  std::size_t total = 0;
  for (const std::vector<int>& seq : batch) {
    if (seq.size() < 2) continue;
    std::vector<int> targets(seq.begin() + 1, seq.end());
    targets.push_back(data::kIgnoreTarget);
    Var hidden = model::forward_hidden(tape, model.lm, seq, train, rng);
    terms.push_back(ops::cross_entropy(model::lm_logits(tape, hidden, model.lm.output_projection()), targets,
                                       data::kIgnoreTarget));
    weights.push_back(static_cast<double>(seq.size() - 1));
    total += seq.size() - 1;
  }
  if (total == 0) throw InputError("language-model batch has no predictable positions");
  for (double& w : weights) w /= static_cast<double>(total);
  return weighted_sum(terms, weights);
}

Var relation_loss(Tape& tape, Model& model, std::span<const data::EncodedExample> batch, int classify_id, bool train,
                  Rng& rng) {
  if (batch.empty()) throw InputError("relation loss of an empty batch");
  std::vector<Var> terms;
  for (const data::EncodedExample& ex : batch) {
    check_example(ex, classify_id, model.head.num_relations());
    Var hidden = model::forward_hidden(tape, model.lm, ex.ids, train, rng);
    const int label[] = {ex.label_id};
    terms.push_back(ops::cross_entropy(model::relation_logits(tape, model, hidden, train, rng), label));
  }
  return weighted_sum(terms, std::vector<double>(terms.size(), 1.0 / static_cast<double>(terms.size())));
}

LossTerms combined_loss(Tape& tape, Model& model, std::span<const data::EncodedExample> batch, int classify_id,
                        double lambda, bool train, Rng& rng) {
  if (!(lambda >= 0.0)) throw ConfigError("language-model weight must be >= 0");
  if (lambda == 0.0) {
    Var rel = relation_loss(tape, model, batch, classify_id, train, rng);
    return {rel, Var{}, rel};
  }
  if (batch.empty()) throw InputError("combined loss of an empty batch");
  std::vector<Var> rel_terms;
  std::vector<Var> lm_terms;
  std::vector<double> lm_weights;
  std::size_t lm_total = 0;
  for (const data::EncodedExample& ex : batch) {
    check_example(ex, classify_id, model.head.num_relations());
    Var hidden = model::forward_hidden(tape, model.lm, ex.ids, train, rng);
    const int label[] = {ex.label_id};
    rel_terms.push_back(ops::cross_entropy(model::relation_logits(tape, model, hidden, train, rng), label));
    const std::size_t n = counted(ex.lm_targets);
    if (n == 0) continue;
    lm_terms.push_back(ops::cross_entropy(model::lm_logits(tape, hidden, model.lm.output_projection()),
                                          ex.lm_targets, data::kIgnoreTarget));
    lm_weights.push_back(static_cast<double>(n));
    lm_total += n;
  }
  LossTerms out;
  out.rel = weighted_sum(rel_terms, std::vector<double>(rel_terms.size(), 1.0 / static_cast<double>(rel_terms.size())));
  if (lm_total == 0) {
    out.lm = tape.constant(numerics::Tensor::scalar(0.0));
  } else {
    for (double& w : lm_weights) w /= static_cast<double>(lm_total);
    out.lm = weighted_sum(lm_terms, lm_weights);
  }
  out.total = ops::add(ops::scale(out.lm, lambda), out.rel);
  return out;
}

double lm_loss_value(Model& model, std::span<const std::vector<int>> batch) {
  Tape tape;
  Rng unused(0);
  return lm_loss(tape, model, batch, false, unused).value().item();
}

}  // namespace trelab::training
