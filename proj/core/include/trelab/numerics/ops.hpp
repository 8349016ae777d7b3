// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "trelab/numerics/rng.hpp"
#include "trelab/numerics/tape.hpp"

// Differentiable operations. Each records its result on the tape of its first
// operand; all operands must live on the same tape.
namespace trelab::numerics {

Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
// x[n×d] + bias[d] broadcast over rows.
Var add_bias(Var x, Var bias);
Var mul(Var a, Var b);
Var scale(Var x, double factor);
Var sum(Var x);

Var softmax(Var x, int axis = -1);
// Sets entries above the diagonal of a square matrix to -inf.
Var causal_mask(Var scores);
// Normalizes over the last dimension, then applies gain and bias.
Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);
// x·Φ(x) with the tanh approximation of Φ.
Var gelu(Var x);

// Mean of -log softmax(logits)[target] over rows whose target is not
// `ignore_id`. With no such rows the loss is 0.
Var cross_entropy(Var logits, std::span<const int> targets, int ignore_id = -1);

// Inverted dropout: in train mode each entry is zeroed with probability
// `rate` and survivors scaled by 1/(1-rate); in eval mode the identity.
Var dropout(Var x, double rate, Rng& rng, bool train);

// Gathers rows of `table` by id.
Var embedding(Var table, std::span<const int> ids);
Var slice_rows(Var x, std::size_t begin, std::size_t end);
Var slice_cols(Var x, std::size_t begin, std::size_t end);
Var concat_cols(const std::vector<Var>& parts);

double gelu_value(double x);

}  // namespace trelab::numerics
