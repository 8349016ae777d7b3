// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trelab/bpe/vocab.hpp"
#include "trelab/data/assembly.hpp"
#include "trelab/data/dataset.hpp"
#include "trelab/eval/scoring.hpp"
#include "trelab/model/checkpoint.hpp"
#include "trelab/training/config.hpp"
#include "trelab/training/optim.hpp"

namespace trelab::training {

struct StepMetrics {
  long step = 0;
  double lr = 0.0;
  double loss = 0.0;
  double lm_loss = 0.0;
  double rel_loss = 0.0;
};

// {"step":..,"lr":..,"loss":..,"lm_loss":..,"rel_loss":..}
std::string to_json_line(const StepMetrics& metrics);

struct EpochReport {
  int epoch = 0;
  long step = 0;
  double train_loss = 0.0;  // mean over the epoch's steps
  eval::ScoreReport validation;
};

struct Hooks {
  std::function<void(const StepMetrics&)> on_step;
  std::function<void(const model::Checkpoint&, long step)> on_checkpoint;
  std::function<void(const EpochReport&)> on_epoch;
};

// Step count and optimizer moments, stored alongside the weights so a run can
// continue from any of its checkpoints.
struct TrainingState {
  long step = 0;
  AdamState adam;
};

void store_training_state(model::Checkpoint& checkpoint, const TrainingState& state,
                          std::span<Parameter* const> params);
std::optional<TrainingState> load_training_state(const model::Checkpoint& checkpoint,
                                                 std::span<Parameter* const> params);

// Minibatch positions visited at step t (1-based) of a run over n items.
// Each epoch uses its own seeded permutation.
std::vector<std::size_t> batch_indices(std::size_t n, int batch_size, std::uint64_t seed, long step);
long steps_per_epoch(std::size_t n, int batch_size);

// A freshly initialized model for `vocab_size` tokens: `base` with the
// overrides of `config`, weights drawn from the run's seed.
model::Model make_model(const TrainConfig& config, model::ModelConfig base, std::size_t vocab_size);

// Language-model training on encoded sentences. With `resume`, the weights and
// optimizer state of that checkpoint are loaded into `model` and the run
// continues after its step. Returns the final checkpoint, which records the
// vocabulary fingerprint and the configuration.
model::Checkpoint pretrain(model::Model& model, std::span<const std::vector<int>> corpus, const bpe::Vocab& vocab,
                           const TrainConfig& config, const Hooks& hooks = {},
                           const model::Checkpoint* resume = nullptr);

struct FinetuneResult {
  model::Model model;
  bpe::Vocab vocab;  // the base vocabulary plus task and mask tokens
  std::vector<std::string> labels;
  std::vector<EpochReport> epochs;
  model::Checkpoint checkpoint;
};

// Relation classifier training with the combined objective. `init` null means
// every weight is random, drawn for `random_config` (its vocabulary size is
// taken from `vocab`). Otherwise `vocab` must carry the fingerprint recorded
// in `init`. Validation runs after every epoch on `valid`, or on the training
// data when `valid` is null.
FinetuneResult finetune(const model::Checkpoint* init, const bpe::Vocab& vocab, const data::Dataset& train,
                        const data::Dataset* valid, const TrainConfig& config,
                        const model::ModelConfig& random_config = {}, const Hooks& hooks = {});

// Arg-max relation ids, eval mode; ties go to the lower id.
std::vector<int> predict(model::Model& model, std::span<const data::EncodedExample> examples, int classify_id);

// A fine-tuned model with everything needed to label new data.
struct Classifier {
  model::Model model;
  bpe::Vocab vocab;
  std::vector<std::string> labels;
  data::MaskingStrategy masking = data::MaskingStrategy::kNone;
  data::DatasetFormat format = data::DatasetFormat::kTacred;

  std::vector<std::string> predict_labels(const data::Dataset& dataset);
  eval::ScoreReport score(const data::Dataset& dataset, std::vector<std::string>* predictions = nullptr);
};

Classifier load_classifier(const model::Checkpoint& checkpoint);
Classifier classifier_from(FinetuneResult result, data::MaskingStrategy masking, data::DatasetFormat format);

// The embedded vocabulary of a checkpoint, checked against its fingerprint.
bpe::Vocab checkpoint_vocab(const model::Checkpoint& checkpoint);

}  // namespace trelab::training
