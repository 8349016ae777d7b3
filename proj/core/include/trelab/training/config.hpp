// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "trelab/data/dataset.hpp"
#include "trelab/data/masking.hpp"
#include "trelab/model/transformer.hpp"

namespace trelab::training {

// Hyperparameters of one training run. The defaults are the TACRED settings
// (3 epochs, batch 8, peak rate 5.25e-5, λ 0.5, warm-up over 0.2% of updates).
struct TrainConfig {
  int epochs = 3;
  int batch_size = 8;
  double peak_lr = 5.25e-5;
  double warmup_fraction = 0.002;
  double lambda_lm = 0.5;
  std::uint64_t seed = 0;
  data::MaskingStrategy masking = data::MaskingStrategy::kNone;
  bool use_pretrained_lm = true;
  bool use_pretrained_bpe_embeddings = true;
  // Optimizer steps for the whole run; 0 derives it from epochs.
  long total_steps = 0;
  // Emit a checkpoint every this many steps; 0 disables.
  long checkpoint_every = 0;
  // Overrides for the model configuration, as the JSON text of an object.
  std::optional<std::string> model;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Best published settings for each dataset. SemEval differs in rate (6.25e-5),
// λ (0.7) and attention dropout (0.15).
TrainConfig default_config(data::DatasetFormat format);
// The "warmup learning rate" reported next to those settings. It exceeds the
// peak rate and is kept only as checkpoint metadata.
double reference_warmup_lr(data::DatasetFormat format);

// JSON object whose keys are TrainConfig field names; missing keys keep the
// values of `base`, unknown keys are a ConfigError.
TrainConfig parse_train_config(std::string_view json_text, TrainConfig base = {});
TrainConfig load_train_config(const std::filesystem::path& path, TrainConfig base = {});
std::string to_json(const TrainConfig& config);

// Applies the `model` overrides of `config` to `base`.
model::ModelConfig apply_model_overrides(const TrainConfig& config, model::ModelConfig base);

}  // namespace trelab::training
