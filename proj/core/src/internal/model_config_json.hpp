// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>
#include <set>
#include <string>

#include "trelab/error.hpp"
#include "trelab/model/transformer.hpp"

namespace trelab::internal {

inline nlohmann::ordered_json model_config_to_json(const model::ModelConfig& c) {
  nlohmann::ordered_json j;
  j["n_layers"] = c.n_layers;
  j["n_heads"] = c.n_heads;
  j["d_model"] = c.d_model;
  j["d_ff"] = c.d_ff;
  j["vocab_size"] = c.vocab_size;
  j["max_positions"] = c.max_positions;
  j["residual_dropout"] = c.residual_dropout;
  j["attention_dropout"] = c.attention_dropout;
  j["classifier_dropout"] = c.classifier_dropout;
  j["n_relations"] = c.n_relations;
  j["layer_norm_eps"] = c.layer_norm_eps;
  j["init_scale"] = c.init_scale;
  return j;
}

// Reads keys present in `j` over `base`; unknown keys are errors.
template <typename Json>
model::ModelConfig model_config_from_json(const Json& j, model::ModelConfig base = {}) {
  if (!j.is_object()) throw ConfigError("model config must be an object");
  static const std::set<std::string> known = {"n_layers",          "n_heads",           "d_model",
                                              "d_ff",              "vocab_size",        "max_positions",
                                              "residual_dropout",  "attention_dropout", "classifier_dropout",
                                              "n_relations",       "layer_norm_eps",    "init_scale"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.contains(it.key())) throw ConfigError("unknown model config key '" + it.key() + "'");
  }
  try {
    auto read_int = [&](const char* key, int& out) {
      if (j.contains(key)) out = j.at(key).template get<int>();
    };
    auto read_double = [&](const char* key, double& out) {
      if (j.contains(key)) out = j.at(key).template get<double>();
    };
    read_int("n_layers", base.n_layers);
    read_int("n_heads", base.n_heads);
    read_int("d_model", base.d_model);
    read_int("d_ff", base.d_ff);
    read_int("vocab_size", base.vocab_size);
    read_int("max_positions", base.max_positions);
    read_double("residual_dropout", base.residual_dropout);
    read_double("attention_dropout", base.attention_dropout);
    read_double("classifier_dropout", base.classifier_dropout);
    read_int("n_relations", base.n_relations);
    read_double("layer_norm_eps", base.layer_norm_eps);
    read_double("init_scale", base.init_scale);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  return base;
}

}  // namespace trelab::internal
