// SPDX-License-Identifier: Apache-2.0
#include "trelab/model/transformer.hpp"

#include <cmath>
#include <string>

#include "trelab/error.hpp"

namespace trelab::model {

using namespace numerics;

void ModelConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("model config: " + what);
  };
  require(n_layers >= 1, "n_layers must be >= 1");
  require(n_heads >= 1, "n_heads must be >= 1");
  require(d_model >= 1 && d_model % n_heads == 0, "d_model must be a positive multiple of n_heads");
  require(d_ff >= 1, "d_ff must be >= 1");
  require(vocab_size >= 1, "vocab_size must be >= 1");
  require(max_positions >= 1, "max_positions must be >= 1");
  require(n_relations >= 0, "n_relations must be >= 0");
  for (double rate : {residual_dropout, attention_dropout, classifier_dropout}) {
    require(rate >= 0.0 && rate < 1.0, "dropout rates must lie in [0, 1)");
  }
  require(layer_norm_eps > 0.0, "layer_norm_eps must be positive");
  require(init_scale > 0.0, "init_scale must be positive");
}

std::vector<Parameter*> TransformerBlock::parameters() {
  return {&qkv_weight, &qkv_bias, &attn_proj_weight, &attn_proj_bias, &ln1_gain, &ln1_bias,
          &fc_weight,  &fc_bias,  &fc_proj_weight,   &fc_proj_bias,   &ln2_gain, &ln2_bias};
}

std::vector<Parameter*> TransformerLM::parameters() {
  std::vector<Parameter*> out{&token_embedding, &position_embedding};
  for (TransformerBlock& b : blocks) {
    for (Parameter* p : b.parameters()) out.push_back(p);
  }
  return out;
}

std::vector<Parameter*> RelationHead::parameters() { return {&weight, &bias}; }

std::vector<Parameter*> Model::parameters() {
  std::vector<Parameter*> out = lm.parameters();
  if (has_head()) {
    out.push_back(&head.weight);
    out.push_back(&head.bias);
  }
  return out;
}

std::size_t Model::parameter_count() {
  std::size_t n = 0;
  for (Parameter* p : parameters()) n += p->value.size();
  return n;
}

namespace {

Parameter normal_parameter(std::string name, Shape shape, double scale, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = scale * rng.normal();
  return Parameter(std::move(name), std::move(t));
}

Parameter constant_parameter(std::string name, std::size_t n, double value) {
  return Parameter(std::move(name), Tensor({n}, value));
}

TransformerBlock make_block(const ModelConfig& c, int index, Rng& rng) {
  const std::string p = "block" + std::to_string(index) + ".";
  const auto d = static_cast<std::size_t>(c.d_model);
  const auto ff = static_cast<std::size_t>(c.d_ff);
  TransformerBlock b;
  b.qkv_weight = normal_parameter(p + "attn.qkv.weight", {d, 3 * d}, c.init_scale, rng);
  b.qkv_bias = constant_parameter(p + "attn.qkv.bias", 3 * d, 0.0);
  b.attn_proj_weight = normal_parameter(p + "attn.proj.weight", {d, d}, c.init_scale, rng);
  b.attn_proj_bias = constant_parameter(p + "attn.proj.bias", d, 0.0);
  b.ln1_gain = constant_parameter(p + "ln1.gain", d, 1.0);
  b.ln1_bias = constant_parameter(p + "ln1.bias", d, 0.0);
  b.fc_weight = normal_parameter(p + "ffn.fc.weight", {d, ff}, c.init_scale, rng);
  b.fc_bias = constant_parameter(p + "ffn.fc.bias", ff, 0.0);
  b.fc_proj_weight = normal_parameter(p + "ffn.proj.weight", {ff, d}, c.init_scale, rng);
  b.fc_proj_bias = constant_parameter(p + "ffn.proj.bias", d, 0.0);
  b.ln2_gain = constant_parameter(p + "ln2.gain", d, 1.0);
  b.ln2_bias = constant_parameter(p + "ln2.bias", d, 0.0);
  return b;
}

RelationHead make_head(const ModelConfig& c, int n_relations, Rng& rng) {
  RelationHead h;
  if (n_relations == 0) return h;
  const auto d = static_cast<std::size_t>(c.d_model);
  const auto r = static_cast<std::size_t>(n_relations);
  h.weight = normal_parameter("head.weight", {d, r}, c.init_scale, rng);
  h.bias = constant_parameter("head.bias", r, 0.0);
  return h;
}

}  // namespace

Model init_model(const ModelConfig& config, Rng& rng) {
  config.validate();
  Model m;
  m.lm.config = config;
  const auto d = static_cast<std::size_t>(config.d_model);
  m.lm.token_embedding =
      normal_parameter("token_embedding", {static_cast<std::size_t>(config.vocab_size), d}, config.init_scale, rng);
  m.lm.position_embedding = normal_parameter(
      "position_embedding", {static_cast<std::size_t>(config.max_positions), d}, config.init_scale, rng);
  for (int i = 0; i < config.n_layers; ++i) m.lm.blocks.push_back(make_block(config, i, rng));
  m.head = make_head(config, config.n_relations, rng);
  return m;
}

void reinitialize_blocks(Model& model, Rng& rng) {
  const ModelConfig& c = model.lm.config;
  const auto d = static_cast<std::size_t>(c.d_model);
  model.lm.position_embedding =
      normal_parameter("position_embedding", {static_cast<std::size_t>(c.max_positions), d}, c.init_scale, rng);
  for (int i = 0; i < c.n_layers; ++i) model.lm.blocks[static_cast<std::size_t>(i)] = make_block(c, i, rng);
}

void reinitialize_token_embedding(Model& model, Rng& rng) {
  const ModelConfig& c = model.lm.config;
  model.lm.token_embedding = normal_parameter(
      "token_embedding", {static_cast<std::size_t>(c.vocab_size), static_cast<std::size_t>(c.d_model)}, c.init_scale,
      rng);
}

void grow_vocabulary(Model& model, int vocab_size, Rng& rng) {
  ModelConfig& c = model.lm.config;
  if (vocab_size < c.vocab_size) {
    throw ConfigError("cannot shrink vocabulary from " + std::to_string(c.vocab_size) + " to " +
                      std::to_string(vocab_size));
  }
  if (vocab_size == c.vocab_size) return;
  const auto d = static_cast<std::size_t>(c.d_model);
  std::vector<double> data(model.lm.token_embedding.value.data().begin(), model.lm.token_embedding.value.data().end());
  for (std::size_t i = static_cast<std::size_t>(c.vocab_size) * d; i < static_cast<std::size_t>(vocab_size) * d; ++i) {
    data.push_back(c.init_scale * rng.normal());
  }
  model.lm.token_embedding =
      Parameter("token_embedding", Tensor({static_cast<std::size_t>(vocab_size), d}, std::move(data)));
  c.vocab_size = vocab_size;
}

void reset_relation_head(Model& model, int n_relations, Rng& rng) {
  if (n_relations < 1) throw ConfigError("relation head needs at least one relation");
  model.lm.config.n_relations = n_relations;
  model.head = make_head(model.lm.config, n_relations, rng);
}

void check_tokens(const ModelConfig& config, std::span<const int> tokens) {
  if (tokens.empty()) throw InputError("empty token sequence");
  if (tokens.size() > static_cast<std::size_t>(config.max_positions)) {
    throw LengthError("sequence of " + std::to_string(tokens.size()) + " tokens exceeds the context window of " +
                      std::to_string(config.max_positions));
  }
  for (int id : tokens) {
    if (id < 0 || id >= config.vocab_size) {
      throw IndexError("token id " + std::to_string(id) + " outside vocabulary of " +
                       std::to_string(config.vocab_size));
    }
  }
}

Var transformer_block(Tape& tape, TransformerBlock& block, Var h, const ModelConfig& config, bool train, Rng& rng,
                      std::vector<Tensor>* attention_weights) {
  const std::size_t d = static_cast<std::size_t>(config.d_model);
  const std::size_t head_dim = static_cast<std::size_t>(config.head_dim());
  const double score_scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

  Var qkv = add_bias(matmul(h, tape.parameter(block.qkv_weight)), tape.parameter(block.qkv_bias));
  std::vector<Var> heads;
  heads.reserve(static_cast<std::size_t>(config.n_heads));
  for (std::size_t k = 0; k < static_cast<std::size_t>(config.n_heads); ++k) {
    Var q = slice_cols(qkv, k * head_dim, (k + 1) * head_dim);
    Var key = slice_cols(qkv, d + k * head_dim, d + (k + 1) * head_dim);
    Var v = slice_cols(qkv, 2 * d + k * head_dim, 2 * d + (k + 1) * head_dim);
    Var scores = causal_mask(scale(matmul(q, transpose(key)), score_scale));
    Var weights = softmax(scores, -1);
    if (attention_weights) attention_weights->push_back(weights.value());
    weights = dropout(weights, config.attention_dropout, rng, train);
    heads.push_back(matmul(weights, v));
  }
  Var attended = heads.size() == 1 ? heads[0] : concat_cols(heads);
  Var attn_out =
      add_bias(matmul(attended, tape.parameter(block.attn_proj_weight)), tape.parameter(block.attn_proj_bias));
  attn_out = dropout(attn_out, config.residual_dropout, rng, train);
  Var h1 = layer_norm(add(h, attn_out), tape.parameter(block.ln1_gain), tape.parameter(block.ln1_bias),
                      config.layer_norm_eps);

  Var ff = gelu(add_bias(matmul(h1, tape.parameter(block.fc_weight)), tape.parameter(block.fc_bias)));
  ff = add_bias(matmul(ff, tape.parameter(block.fc_proj_weight)), tape.parameter(block.fc_proj_bias));
  ff = dropout(ff, config.residual_dropout, rng, train);
  return layer_norm(add(h1, ff), tape.parameter(block.ln2_gain), tape.parameter(block.ln2_bias),
                    config.layer_norm_eps);
}

Var forward_hidden(Tape& tape, TransformerLM& lm, std::span<const int> tokens, bool train, Rng& rng,
                   AttentionTrace* trace) {
  check_tokens(lm.config, tokens);
  std::vector<int> positions(tokens.size());
  for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = static_cast<int>(i);
  Var h = add(embedding(tape.parameter(lm.token_embedding), tokens),
              embedding(tape.parameter(lm.position_embedding), positions));
  if (trace) trace->weights.assign(lm.blocks.size(), {});
  for (std::size_t l = 0; l < lm.blocks.size(); ++l) {
    h = transformer_block(tape, lm.blocks[l], h, lm.config, train, rng, trace ? &trace->weights[l] : nullptr);
  }
  return h;
}

Var lm_logits(Tape& tape, Var hidden, Parameter& projection) {
  return matmul(hidden, transpose(tape.parameter(projection)));
}

Var relation_logits(Tape& tape, Model& model, Var hidden, bool train, Rng& rng) {
  if (!model.has_head()) throw ConfigError("model has no relation head");
  const std::size_t n = hidden.value().shape()[0];
  Var last = slice_rows(hidden, n - 1, n);
  last = dropout(last, model.config().classifier_dropout, rng, train);
  return add_bias(matmul(last, tape.parameter(model.head.weight)), tape.parameter(model.head.bias));
}

Tensor forward_lm(Model& model, std::span<const int> tokens, bool train, Rng& rng) {
  Tape tape;
  Var h = forward_hidden(tape, model.lm, tokens, train, rng);
  return lm_logits(tape, h, model.lm.output_projection()).value();
}

Tensor forward_relation(Model& model, std::span<const int> tokens, int classify_id, bool train, Rng& rng) {
  if (tokens.empty() || tokens.back() != classify_id) {
    throw ContractError("relation input must end with the classification token");
  }
  Tape tape;
  Var h = forward_hidden(tape, model.lm, tokens, train, rng);
  const Tensor& logits = relation_logits(tape, model, h, train, rng).value();
  return Tensor({logits.size()}, std::vector<double>(logits.data().begin(), logits.data().end()));
}

}  // namespace trelab::model
