// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "trelab/data/assembly.hpp"
#include "trelab/model/transformer.hpp"

namespace trelab::training {

using model::Model;
using numerics::Rng;
using numerics::Tape;
using numerics::Var;

// Mean next-token cross-entropy pooled over every predictable position of the
// batch (each sequence predicts tokens 1..n-1). Empty batch: InputError.
Var lm_loss(Tape& tape, Model& model, std::span<const std::vector<int>> batch, bool train, Rng& rng);

// Mean cross-entropy of the relation logits against the label ids. Every
// example must end with `classify_id`; a label id outside the head is an IndexError.
Var relation_loss(Tape& tape, Model& model, std::span<const data::EncodedExample> batch, int classify_id, bool train,
                  Rng& rng);

struct LossTerms {
  Var total;
  Var lm;   // pooled over the assembled sequences, the CLF position excluded
  Var rel;
};

// λ·lm + rel from a single forward pass per example. With λ = 0 the total is
// the relation loss itself.
LossTerms combined_loss(Tape& tape, Model& model, std::span<const data::EncodedExample> batch, int classify_id,
                        double lambda, bool train, Rng& rng);

// Eval-mode value of lm_loss.
double lm_loss_value(Model& model, std::span<const std::vector<int>> batch);

}  // namespace trelab::training
