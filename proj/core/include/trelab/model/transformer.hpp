// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "trelab/numerics/ops.hpp"
#include "trelab/numerics/rng.hpp"
#include "trelab/numerics/tape.hpp"

namespace trelab::model {

using numerics::Parameter;
using numerics::Rng;
using numerics::Tape;
using numerics::Tensor;
using numerics::Var;

struct ModelConfig {
  int n_layers = 2;
  int n_heads = 2;
  int d_model = 32;
  int d_ff = 128;
  int vocab_size = 0;
  int max_positions = 64;
  double residual_dropout = 0.1;
  double attention_dropout = 0.1;
  double classifier_dropout = 0.1;
  // 0 for a language-model-only network.
  int n_relations = 0;
  double layer_norm_eps = 1e-5;
  // Standard deviation of the normal weight initialization.
  double init_scale = 0.02;

  void validate() const;
  int head_dim() const { return d_model / n_heads; }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct TransformerBlock {
  Parameter qkv_weight;   // d_model × 3·d_model
  Parameter qkv_bias;     // 3·d_model
  Parameter attn_proj_weight;  // d_model × d_model
  Parameter attn_proj_bias;
  Parameter ln1_gain;
  Parameter ln1_bias;
  Parameter fc_weight;    // d_model × d_ff
  Parameter fc_bias;
  Parameter fc_proj_weight;  // d_ff × d_model
  Parameter fc_proj_bias;
  Parameter ln2_gain;
  Parameter ln2_bias;

  std::vector<Parameter*> parameters();
};

// Decoder-only transformer. The token embedding doubles as the output
// projection of the language-model head.
struct TransformerLM {
  ModelConfig config;
  Parameter token_embedding;     // V × d_model
  Parameter position_embedding;  // max_positions × d_model
  std::vector<TransformerBlock> blocks;

  Parameter& output_projection() { return token_embedding; }
  std::vector<Parameter*> parameters();
};

// Linear classifier over the final position's state.
struct RelationHead {
  Parameter weight;  // d_model × R
  Parameter bias;    // R

  std::size_t num_relations() const { return bias.value.size(); }
  std::vector<Parameter*> parameters();
};

struct Model {
  TransformerLM lm;
  RelationHead head;  // empty when config.n_relations == 0

  const ModelConfig& config() const { return lm.config; }
  bool has_head() const { return lm.config.n_relations > 0; }
  // Every trainable parameter, the relation head last.
  std::vector<Parameter*> parameters();
  std::size_t parameter_count();
};

// Weights ~ N(0, init_scale²), normalization gains 1, every bias 0.
Model init_model(const ModelConfig& config, Rng& rng);

// Draws fresh values for the transformer blocks and position embedding.
void reinitialize_blocks(Model& model, Rng& rng);
void reinitialize_token_embedding(Model& model, Rng& rng);
// Appends N(0, init_scale²) rows so the embedding covers `vocab_size` tokens.
void grow_vocabulary(Model& model, int vocab_size, Rng& rng);
// Replaces the relation head with a fresh one of `n_relations` outputs.
void reset_relation_head(Model& model, int n_relations, Rng& rng);

// Optional per-block capture of attention weights (one n×n matrix per head).
struct AttentionTrace {
  std::vector<std::vector<Tensor>> weights;
};

Var transformer_block(Tape& tape, TransformerBlock& block, Var h, const ModelConfig& config, bool train, Rng& rng,
                      std::vector<Tensor>* attention_weights = nullptr);

// h_L for a token sequence: embeddings plus positions through every block.
Var forward_hidden(Tape& tape, TransformerLM& lm, std::span<const int> tokens, bool train, Rng& rng,
                   AttentionTrace* trace = nullptr);
// h_L · projectionᵀ; pass the token embedding for the tied head.
Var lm_logits(Tape& tape, Var hidden, Parameter& projection);
// Classifier on the last row of `hidden`, with classifier dropout in train mode. Shape 1×R.
Var relation_logits(Tape& tape, Model& model, Var hidden, bool train, Rng& rng);

// Convenience wrappers returning plain values.
Tensor forward_lm(Model& model, std::span<const int> tokens, bool train, Rng& rng);
// `tokens` must end with `classify_id`.
Tensor forward_relation(Model& model, std::span<const int> tokens, int classify_id, bool train, Rng& rng);

// Throws LengthError/IndexError when the sequence does not fit the model.
void check_tokens(const ModelConfig& config, std::span<const int> tokens);

}  // namespace trelab::model
