// SPDX-License-Identifier: Apache-2.0
#include "trelab/training/loops.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "trelab/error.hpp"
#include "trelab/training/losses.hpp"

namespace trelab::training {
namespace {

constexpr std::uint64_t kInitStream = 0x1417;
constexpr std::uint64_t kShuffleStream = 0x5b0f;
constexpr std::uint64_t kDropoutStream = 0xd20b;

constexpr const char* kStepKey = "optim.step";

std::string number(double v) { return nlohmann::json(v).dump(); }

model::Checkpoint snapshot(model::Model& m, const bpe::Vocab& vocab, std::map<std::string, std::string> metadata) {
  model::Checkpoint ck;
  ck.config = m.config();
  ck.vocab_fingerprint = vocab.fingerprint();
  ck.metadata = std::move(metadata);
  ck.metadata["vocab"] = vocab.serialize();
  ck.tensors = model::model_tensors(m);
  return ck;
}

void check_config_matches(const model::ModelConfig& have, const model::ModelConfig& want) {
  auto arch = [](model::ModelConfig c) {
    c.residual_dropout = c.attention_dropout = c.classifier_dropout = 0.0;
    return c;
  };
  if (!(arch(have) == arch(want))) {
    throw ConfigError("model overrides change the architecture of the initial checkpoint; only dropout rates may differ");
  }
}

std::vector<std::string> parse_string_array(const std::string& text, const char* what) {
  try {
    return nlohmann::json::parse(text).get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: bad ") + what + ": " + e.what());
  }
}

}  // namespace

std::string to_json_line(const StepMetrics& m) {
  nlohmann::ordered_json j;
  j["step"] = m.step;
  j["lr"] = m.lr;
  j["loss"] = m.loss;
  j["lm_loss"] = m.lm_loss;
  j["rel_loss"] = m.rel_loss;
  return j.dump();
}

void store_training_state(model::Checkpoint& ck, const TrainingState& state, std::span<Parameter* const> params) {
  ck.metadata[kStepKey] = std::to_string(state.step);
  for (std::size_t i = 0; i < params.size(); ++i) {
    ck.tensors.push_back({"optim.m/" + params[i]->name, state.adam.m[i]});
    ck.tensors.push_back({"optim.v/" + params[i]->name, state.adam.v[i]});
  }
}

std::optional<TrainingState> load_training_state(const model::Checkpoint& ck, std::span<Parameter* const> params) {
  const std::string* step = ck.meta(kStepKey);
  if (!step) return std::nullopt;
  TrainingState state;
  try {
    state.step = std::stol(*step);
  } catch (const std::logic_error&) {
    throw ParseError("checkpoint: bad optimizer step '" + *step + "'");
  }
  for (const Parameter* p : params) {
    const numerics::Tensor* m = ck.find("optim.m/" + p->name);
    const numerics::Tensor* v = ck.find("optim.v/" + p->name);
    if (!m || !v || m->shape() != p->value.shape() || v->shape() != p->value.shape()) {
      throw ParseError("checkpoint: optimizer state for '" + p->name + "' missing or misshapen");
    }
    state.adam.m.push_back(*m);
    state.adam.v.push_back(*v);
  }
  state.adam.step = state.step;
  return state;
}

long steps_per_epoch(std::size_t n, int batch_size) {
  const auto b = static_cast<std::size_t>(batch_size);
  return static_cast<long>((n + b - 1) / b);
}

std::vector<std::size_t> batch_indices(std::size_t n, int batch_size, std::uint64_t seed, long step) {
  if (n == 0 || batch_size < 1 || step < 1) throw ContractError("batch_indices needs items, a batch size and step >= 1");
  const long per_epoch = steps_per_epoch(n, batch_size);
  const long epoch = (step - 1) / per_epoch;
  const long within = (step - 1) % per_epoch;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  numerics::Rng rng = numerics::Rng::derive(seed, kShuffleStream, static_cast<std::uint64_t>(epoch));
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  const std::size_t begin = static_cast<std::size_t>(within) * static_cast<std::size_t>(batch_size);
  const std::size_t end = std::min(n, begin + static_cast<std::size_t>(batch_size));
  return {order.begin() + static_cast<std::ptrdiff_t>(begin), order.begin() + static_cast<std::ptrdiff_t>(end)};
}

model::Model make_model(const TrainConfig& config, model::ModelConfig base, std::size_t vocab_size) {
  model::ModelConfig mc = apply_model_overrides(config, base);
  mc.vocab_size = static_cast<int>(vocab_size);
  numerics::Rng rng = numerics::Rng::derive(config.seed, kInitStream);
  return model::init_model(mc, rng);
}

model::Checkpoint pretrain(model::Model& model, std::span<const std::vector<int>> corpus, const bpe::Vocab& vocab,
                           const TrainConfig& config, const Hooks& hooks, const model::Checkpoint* resume) {
  config.validate();
  if (static_cast<std::size_t>(model.config().vocab_size) != vocab.size()) {
    throw ConfigError("model has " + std::to_string(model.config().vocab_size) + " embeddings, vocabulary has " +
                      std::to_string(vocab.size()) + " tokens");
  }
  if (corpus.empty()) throw InputError("pre-training corpus is empty");
  for (const auto& seq : corpus) model::check_tokens(model.config(), seq);

  std::vector<Parameter*> params = model.lm.parameters();
  const long total = config.total_steps > 0 ? config.total_steps
                                            : config.epochs * steps_per_epoch(corpus.size(), config.batch_size);
  const Schedule schedule(total, config.warmup_fraction, config.peak_lr);

  TrainingState state{0, make_adam_state(params)};
  if (resume) {
    if (resume->vocab_fingerprint != vocab.fingerprint()) throw ConfigError("resume checkpoint uses another vocabulary");
    if (!(resume->config == model.config())) throw ConfigError("resume checkpoint has another model configuration");
    for (Parameter* p : params) {
      const numerics::Tensor* t = resume->find(p->name);
      if (!t || t->shape() != p->value.shape()) throw ParseError("checkpoint: tensor '" + p->name + "' missing or misshapen");
      p->value = *t;
    }
    auto loaded = load_training_state(*resume, params);
    if (!loaded) throw ConfigError("resume checkpoint carries no optimizer state");
    if (loaded->step > total) throw ConfigError("resume checkpoint is past the end of this run");
    state = std::move(*loaded);
  }

  auto make_checkpoint = [&] {
    model::Checkpoint ck = snapshot(model, vocab, {{"kind", "pretrained"}, {"train_config", to_json(config)}});
    store_training_state(ck, state, params);
    return ck;
  };

  std::vector<std::vector<int>> batch;
  while (state.step < total) {
    const long step = state.step + 1;
    batch.clear();
    for (std::size_t i : batch_indices(corpus.size(), config.batch_size, config.seed, step)) batch.push_back(corpus[i]);
    zero_grads(params);
    numerics::Tape tape;
    numerics::Rng rng = numerics::Rng::derive(config.seed, kDropoutStream, static_cast<std::uint64_t>(step));
    Var loss = lm_loss(tape, model, batch, true, rng);
    tape.backward(loss);
    const double lr = schedule.lr_at(step);
    adam_step(params, state.adam, lr);
    state.step = step;
    if (hooks.on_step) hooks.on_step({step, lr, loss.value().item(), loss.value().item(), 0.0});
    if (hooks.on_checkpoint && config.checkpoint_every > 0 && step % config.checkpoint_every == 0 && step < total) {
      hooks.on_checkpoint(make_checkpoint(), step);
    }
  }
  return make_checkpoint();
}

std::vector<int> predict(model::Model& model, std::span<const data::EncodedExample> examples, int classify_id) {
  std::vector<int> out;
  out.reserve(examples.size());
  numerics::Rng unused(0);
  for (const data::EncodedExample& ex : examples) {
    const numerics::Tensor logits = model::forward_relation(model, ex.ids, classify_id, false, unused);
    const auto d = logits.data();
    out.push_back(static_cast<int>(std::max_element(d.begin(), d.end()) - d.begin()));
  }
  return out;
}

FinetuneResult finetune(const model::Checkpoint* init, const bpe::Vocab& vocab, const data::Dataset& train,
                        const data::Dataset* valid, const TrainConfig& config, const model::ModelConfig& random_config,
                        const Hooks& hooks) {
  config.validate();
  if (train.empty()) throw InputError("fine-tuning dataset is empty");
  if (train.labels.empty()) throw InputError("fine-tuning dataset has no label set");
  // Surfaces strategy/data mismatches before any weights are touched.
  std::set<std::string> mask_tokens;
  for (const data::Dataset* ds : {&train, valid}) {
    if (!ds) continue;
    for (std::string& t : data::mask_vocabulary(*ds, config.masking)) mask_tokens.insert(std::move(t));
  }

  numerics::Rng rng = numerics::Rng::derive(config.seed, kInitStream);
  FinetuneResult result;
  if (init) {
    if (init->vocab_fingerprint != vocab.fingerprint()) {
      throw ConfigError("vocabulary fingerprint " + vocab.fingerprint() + " differs from the checkpoint's " +
                        init->vocab_fingerprint);
    }
    result.model = model::restore_model(*init);
    const model::ModelConfig wanted = apply_model_overrides(config, result.model.config());
    check_config_matches(result.model.config(), wanted);
    result.model.lm.config = wanted;
    if (!config.use_pretrained_lm) model::reinitialize_blocks(result.model, rng);
    if (!config.use_pretrained_bpe_embeddings) model::reinitialize_token_embedding(result.model, rng);
  } else {
    model::ModelConfig mc = apply_model_overrides(config, random_config);
    mc.vocab_size = static_cast<int>(vocab.size());
    mc.n_relations = 0;
    result.model = model::init_model(mc, rng);
  }

  std::vector<std::string> added;
  for (const std::string& t : data::task_special_tokens())
    if (!vocab.find(t)) added.push_back(t);
  for (const std::string& t : mask_tokens)
    if (!vocab.find(t)) added.push_back(t);
  result.vocab = added.empty() ? vocab : bpe::extend_with_special_tokens(vocab, added);
  model::grow_vocabulary(result.model, static_cast<int>(result.vocab.size()), rng);
  result.labels = train.labels;
  model::reset_relation_head(result.model, static_cast<int>(result.labels.size()), rng);

  model::Model& model = result.model;
  const auto max_positions = static_cast<std::size_t>(model.config().max_positions);
  const data::AssembledSet train_set =
      data::assemble_dataset(train, config.masking, result.labels, result.vocab, max_positions);
  const data::Dataset& valid_data = valid ? *valid : train;
  const data::AssembledSet valid_set =
      data::assemble_dataset(valid_data, config.masking, result.labels, result.vocab, max_positions);
  std::vector<std::string> valid_gold;
  for (const auto& inst : valid_data.instances) valid_gold.push_back(inst.label);

  const int classify_id = result.vocab.id(bpe::kClassify);
  std::vector<Parameter*> params = model.parameters();
  const long per_epoch = steps_per_epoch(train_set.examples.size(), config.batch_size);
  const long total = config.total_steps > 0 ? config.total_steps : config.epochs * per_epoch;
  const Schedule schedule(total, config.warmup_fraction, config.peak_lr);
  AdamState adam = make_adam_state(params);

  double epoch_loss = 0.0;
  long epoch_steps = 0;
  std::vector<data::EncodedExample> batch;
  for (long step = 1; step <= total; ++step) {
    batch.clear();
    for (std::size_t i : batch_indices(train_set.examples.size(), config.batch_size, config.seed, step)) {
      batch.push_back(train_set.examples[i]);
    }
    zero_grads(params);
    numerics::Tape tape;
    numerics::Rng dropout_rng = numerics::Rng::derive(config.seed, kDropoutStream, static_cast<std::uint64_t>(step));
    const LossTerms loss = combined_loss(tape, model, batch, classify_id, config.lambda_lm, true, dropout_rng);
    tape.backward(loss.total);
    const double lr = schedule.lr_at(step);
    adam_step(params, adam, lr);

    StepMetrics m{step, lr, loss.total.value().item(), loss.lm.valid() ? loss.lm.value().item() : 0.0,
                  loss.rel.value().item()};
    if (hooks.on_step) hooks.on_step(m);
    epoch_loss += m.loss;
    ++epoch_steps;

    if (step % per_epoch == 0 || step == total) {
      std::vector<std::string> pred;
      for (int id : predict(model, valid_set.examples, classify_id)) pred.push_back(result.labels[static_cast<std::size_t>(id)]);
      EpochReport report;
      report.epoch = static_cast<int>((step - 1) / per_epoch) + 1;
      report.step = step;
      report.train_loss = epoch_loss / static_cast<double>(epoch_steps);
      report.validation = eval::score(train.format, valid_gold, pred, train.negative_label());
      if (hooks.on_epoch) hooks.on_epoch(report);
      result.epochs.push_back(std::move(report));
      epoch_loss = 0.0;
      epoch_steps = 0;
    }
    if (hooks.on_checkpoint && config.checkpoint_every > 0 && step % config.checkpoint_every == 0 && step < total) {
      hooks.on_checkpoint(snapshot(model, result.vocab, {{"kind", "partial"}}), step);
    }
  }

  nlohmann::json history = nlohmann::json::array();
  for (const EpochReport& r : result.epochs) history.push_back({{"epoch", r.epoch}, {"f1", r.validation.f1}});
  result.checkpoint = snapshot(model, result.vocab,
                               {{"kind", "finetuned"},
                                {"labels", nlohmann::json(result.labels).dump()},
                                {"masking", std::string(data::to_string(config.masking))},
                                {"format", std::string(data::to_string(train.format))},
                                {"train_config", to_json(config)},
                                {"base_vocab_fingerprint", vocab.fingerprint()},
                                {"reference_warmup_lr", number(reference_warmup_lr(train.format))},
                                {"truncated_train_examples", std::to_string(train_set.truncated)},
                                {"validation", history.dump()}});
  return result;
}

bpe::Vocab checkpoint_vocab(const model::Checkpoint& ck) {
  const std::string* text = ck.meta("vocab");
  if (!text) throw ConfigError("checkpoint carries no vocabulary");
  bpe::Vocab vocab = bpe::Vocab::parse(*text);
  if (vocab.fingerprint() != ck.vocab_fingerprint) {
    throw ParseError("checkpoint: embedded vocabulary does not match its fingerprint");
  }
  return vocab;
}

Classifier load_classifier(const model::Checkpoint& ck) {
  const std::string* kind = ck.meta("kind");
  if (!kind || *kind != "finetuned") throw ConfigError("checkpoint is not a fine-tuned relation classifier");
  const std::string* labels = ck.meta("labels");
  const std::string* masking = ck.meta("masking");
  const std::string* format = ck.meta("format");
  if (!labels || !masking || !format) throw ParseError("checkpoint: classifier metadata incomplete");
  Classifier c{model::restore_model(ck), checkpoint_vocab(ck), parse_string_array(*labels, "label list"),
               data::parse_masking(*masking), data::parse_format(*format)};
  if (c.labels.size() != c.model.head.num_relations()) throw ParseError("checkpoint: label list does not match the head");
  return c;
}

Classifier classifier_from(FinetuneResult result, data::MaskingStrategy masking, data::DatasetFormat format) {
  return Classifier{std::move(result.model), std::move(result.vocab), std::move(result.labels), masking, format};
}

std::vector<std::string> Classifier::predict_labels(const data::Dataset& dataset) {
  if (dataset.empty()) throw InputError("dataset is empty");
  const data::AssembledSet set = data::assemble_dataset(dataset, masking, labels, vocab,
                                                        static_cast<std::size_t>(model.config().max_positions));
  std::vector<std::string> out;
  for (int id : predict(model, set.examples, vocab.id(bpe::kClassify))) out.push_back(labels[static_cast<std::size_t>(id)]);
  return out;
}

eval::ScoreReport Classifier::score(const data::Dataset& dataset, std::vector<std::string>* predictions) {
  std::vector<std::string> pred = predict_labels(dataset);
  std::vector<std::string> gold;
  for (const auto& inst : dataset.instances) gold.push_back(inst.label);
  eval::ScoreReport report = eval::score(dataset.format, gold, pred, dataset.negative_label());
  if (predictions) *predictions = std::move(pred);
  return report;
}

}  // namespace trelab::training
