// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>

#include "gradcheck.hpp"
#include "trelab/data/synthetic.hpp"
#include "trelab/error.hpp"
#include "trelab/training/config.hpp"
#include "trelab/training/loops.hpp"
#include "trelab/training/losses.hpp"
#include "trelab/training/optim.hpp"

namespace {

using namespace trelab;
using namespace trelab::training;

TEST(Schedule, WarmupThenLinearDecay) {
  const Schedule s(1000, 0.002, 1.0);
  EXPECT_EQ(s.warmup_steps(), 2);
  EXPECT_EQ(s.lr_at(0), 0.0);
  EXPECT_EQ(s.lr_at(1), 0.5);
  EXPECT_EQ(s.lr_at(2), 1.0);
  EXPECT_NEAR(s.lr_at(500), 500.0 / 998.0, 1e-15);
  EXPECT_EQ(s.lr_at(1000), 0.0);
  EXPECT_THROW(s.lr_at(-1), trelab::ScheduleError);
  EXPECT_THROW(s.lr_at(1001), trelab::ScheduleError);
}

TEST(Schedule, SecondDifferencesVanishAwayFromThePeak) {
  const Schedule s(1000, 0.002, 6.25e-5);
  for (long t = 1; t < 1000; ++t) {
    if (t == s.warmup_steps()) continue;
    const double second = s.lr_at(t + 1) - 2.0 * s.lr_at(t) + s.lr_at(t - 1);
    EXPECT_NEAR(second, 0.0, 1e-18) << "step " << t;
  }
}

TEST(Schedule, AtLeastOneWarmupStep) {
  EXPECT_EQ(Schedule(10, 0.0, 1.0).warmup_steps(), 1);
  EXPECT_EQ(Schedule(1, 0.5, 1.0).warmup_steps(), 1);
  EXPECT_EQ(Schedule(1, 0.5, 1.0).lr_at(1), 1.0);
  EXPECT_THROW(Schedule(0, 0.1, 1.0), trelab::ConfigError);
}

TEST(Adam, FirstStepMovesByRateAgainstGradientSign) {
  Parameter w("w", Tensor::vector({1.0, -2.0, 3.0}));
  std::vector<Parameter*> params = {&w};
  AdamState state = make_adam_state(params);
  w.grad = Tensor::vector({0.5, -4.0, 1e-3});
  adam_step(params, state, 0.01);
  EXPECT_NEAR(w.value[0], 0.99, 1e-6);
  EXPECT_NEAR(w.value[1], -1.99, 1e-6);
  EXPECT_NEAR(w.value[2], 2.99, 1e-5);
  EXPECT_EQ(state.step, 1);
}

TEST(Adam, MinimizesQuadraticBowl) {
  Parameter w("w", Tensor::vector({3.0, -5.0}));
  std::vector<Parameter*> params = {&w};
  AdamState state = make_adam_state(params);
  for (int i = 0; i < 2000; ++i) {
    zero_grads(params);
    w.grad[0] = 2.0 * (w.value[0] - 1.0);
    w.grad[1] = 8.0 * (w.value[1] + 2.0);
    adam_step(params, state, 0.05 * (1.0 - i / 2000.0));
  }
  EXPECT_NEAR(w.value[0], 1.0, 1e-3);
  EXPECT_NEAR(w.value[1], -2.0, 1e-3);
}

TEST(Adam, NonFiniteGradientLeavesParametersUntouched) {
  Parameter a("a", Tensor::vector({1.0})), b("b", Tensor::vector({2.0}));
  std::vector<Parameter*> params = {&a, &b};
  AdamState state = make_adam_state(params);
  a.grad = Tensor::vector({1.0});
  b.grad = Tensor::vector({std::numeric_limits<double>::quiet_NaN()});
  try {
    adam_step(params, state, 0.1);
    FAIL() << "expected NumericError";
  } catch (const trelab::NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("'b'"), std::string::npos) << e.what();
  }
  EXPECT_EQ(a.value[0], 1.0);
  EXPECT_EQ(state.step, 0);
}

model::ModelConfig tiny_config(int vocab, int relations) {
  model::ModelConfig c;
  c.n_layers = 2;
  c.n_heads = 2;
  c.d_model = 8;
  c.d_ff = 16;
  c.vocab_size = vocab;
  c.max_positions = 12;
  c.n_relations = relations;
  return c;
}

std::vector<data::EncodedExample> random_examples(Rng& rng, int relations, int clf, std::size_t count) {
  std::vector<data::EncodedExample> out;
  for (std::size_t k = 0; k < count; ++k) {
    data::EncodedExample ex;
    const std::size_t n = 4 + rng.below(6);
    for (std::size_t i = 0; i + 1 < n; ++i) ex.ids.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(clf))));
    ex.ids.push_back(clf);
    for (std::size_t i = 1; i < n; ++i) ex.lm_targets.push_back(ex.ids[i]);
    ex.lm_targets.push_back(data::kIgnoreTarget);
    ex.label_id = static_cast<int>(rng.below(static_cast<std::uint64_t>(relations)));
    ex.sentence_begin = 1;
    ex.sentence_end = n - 1;
    out.push_back(std::move(ex));
  }
  return out;
}

TEST(Losses, LmLossIsPooledTokenMean) {
  Rng rng(1);
  Model m = model::init_model(tiny_config(20, 0), rng);
  const std::vector<std::vector<int>> batch = {{1, 2, 3}, {4, 5, 6, 7, 8, 9}};
  double total = 0.0;
  int count = 0;
  for (const auto& seq : batch) {
    const Tensor logits = model::forward_lm(m, seq, false, rng);
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      double z = 0.0;
      for (std::size_t v = 0; v < 20; ++v) z += std::exp(logits(i, v));
      total += std::log(z) - logits(i, static_cast<std::size_t>(seq[i + 1]));
      ++count;
    }
  }
  EXPECT_NEAR(lm_loss_value(m, batch), total / count, 1e-12);
  EXPECT_THROW(lm_loss_value(m, {}), trelab::InputError);
}

TEST(Losses, CombinedIsLinearInLambda) {
  Rng rng(2);
  Model m = model::init_model(tiny_config(20, 3), rng);
  const auto batch = random_examples(rng, 3, 19, 3);
  for (double lambda : {0.25, 0.5, 2.0}) {
    Tape tape;
    Rng r(0);
    const LossTerms t = combined_loss(tape, m, batch, 19, lambda, false, r);
    EXPECT_NEAR(t.total.value().item(), lambda * t.lm.value().item() + t.rel.value().item(), 1e-12);
  }
}

TEST(Losses, LambdaZeroIsExactlyRelationLoss) {
  Rng rng(3);
  Model m = model::init_model(tiny_config(20, 3), rng);
  const auto batch = random_examples(rng, 3, 19, 4);
  Tape t1, t2;
  Rng r1(5), r2(5);
  const double combined = combined_loss(t1, m, batch, 19, 0.0, true, r1).total.value().item();
  const double rel = relation_loss(t2, m, batch, 19, true, r2).value().item();
  EXPECT_EQ(combined, rel);
}

TEST(Losses, RelationLossContracts) {
  Rng rng(4);
  Model m = model::init_model(tiny_config(20, 3), rng);
  auto batch = random_examples(rng, 3, 19, 2);
  Tape tape;
  batch[0].label_id = 3;
  EXPECT_THROW(relation_loss(tape, m, batch, 19, false, rng), trelab::IndexError);
  batch[0].label_id = 0;
  batch[1].ids.back() = 2;
  EXPECT_THROW(relation_loss(tape, m, batch, 19, false, rng), trelab::ContractError);
}

TEST(Losses, CombinedGradientMatchesFiniteDifferences) {
  Rng rng(5);
  Model m = model::init_model(tiny_config(20, 3), rng);
  const auto batch = random_examples(rng, 3, 19, 2);
  auto loss = [&](Tape& tape) {
    Rng r(0);
    return combined_loss(tape, m, batch, 19, 0.5, false, r).total;
  };
  const auto worst = trelab::testing::check_gradients(loss, m.parameters());
  EXPECT_LT(worst.relative, 1e-4) << worst.parameter << "[" << worst.index << "] " << worst.analytic << " vs "
                                  << worst.numeric;
}

TEST(Config, DefaultsPerFormat) {
  const TrainConfig t = default_config(data::DatasetFormat::kTacred);
  EXPECT_EQ(t.epochs, 3);
  EXPECT_EQ(t.batch_size, 8);
  EXPECT_EQ(t.peak_lr, 5.25e-5);
  EXPECT_EQ(t.lambda_lm, 0.5);
  EXPECT_EQ(t.warmup_fraction, 0.002);
  const TrainConfig s = default_config(data::DatasetFormat::kSemEval);
  EXPECT_EQ(s.peak_lr, 6.25e-5);
  EXPECT_EQ(s.lambda_lm, 0.7);
  EXPECT_EQ(apply_model_overrides(s, {}).attention_dropout, 0.15);
  EXPECT_EQ(reference_warmup_lr(data::DatasetFormat::kTacred), 2e-3);
  EXPECT_EQ(reference_warmup_lr(data::DatasetFormat::kSemEval), 1e-3);
}

TEST(Config, StrictParsingAndRoundTrip) {
  TrainConfig c = parse_train_config(R"({"epochs": 5, "masking": "ne_gr", "model": {"d_model": 16}})");
  EXPECT_EQ(c.epochs, 5);
  EXPECT_EQ(c.masking, data::MaskingStrategy::kNeGr);
  EXPECT_EQ(apply_model_overrides(c, {}).d_model, 16);
  EXPECT_EQ(parse_train_config(to_json(c)), c);
  EXPECT_THROW(parse_train_config(R"({"epoch": 5})"), trelab::ConfigError);
  EXPECT_THROW(parse_train_config(R"({"epochs": "five"})"), trelab::ConfigError);
  EXPECT_THROW(parse_train_config(R"({"batch_size": 0})"), trelab::ConfigError);
  EXPECT_THROW(parse_train_config(R"({"model": {"depth": 3}})").validate(), trelab::ConfigError);
  EXPECT_THROW(parse_train_config("[1]"), trelab::ConfigError);
}

TEST(Batches, EachEpochIsAPermutation) {
  const std::size_t n = 23;
  const int b = 5;
  const long per_epoch = steps_per_epoch(n, b);
  EXPECT_EQ(per_epoch, 5);
  std::vector<std::size_t> first_epoch;
  for (long epoch = 0; epoch < 3; ++epoch) {
    std::multiset<std::size_t> seen;
    std::vector<std::size_t> order;
    for (long s = 1; s <= per_epoch; ++s) {
      for (std::size_t i : batch_indices(n, b, 9, epoch * per_epoch + s)) {
        seen.insert(i);
        order.push_back(i);
      }
    }
    EXPECT_EQ(seen.size(), n);
    EXPECT_EQ(std::set<std::size_t>(seen.begin(), seen.end()).size(), n);
    if (epoch == 0) first_epoch = order;
    else EXPECT_NE(order, first_epoch);
  }
  EXPECT_EQ(batch_indices(n, b, 9, 7), batch_indices(n, b, 9, 7));
}

struct PretrainFixture {
  bpe::Vocab vocab;
  std::vector<std::vector<int>> corpus;
  model::ModelConfig config;
};

PretrainFixture pretrain_fixture() {
  PretrainFixture f;
  const auto sentences = data::synthetic::make_memorization_corpus(12, 4);
  f.vocab = bpe::train_bpe(sentences, 80);
  f.corpus = data::encode_corpus(sentences, f.vocab, 24);
  f.config = tiny_config(static_cast<int>(f.vocab.size()), 0);
  f.config.max_positions = 24;
  return f;
}

TEST(Loops, ResumeReproducesUninterruptedRun) {
  const PretrainFixture f = pretrain_fixture();
  TrainConfig c;
  c.epochs = 3;
  c.batch_size = 4;
  c.peak_lr = 1e-2;
  c.warmup_fraction = 0.1;
  c.seed = 17;
  c.checkpoint_every = 4;

  std::vector<std::pair<long, model::Checkpoint>> snapshots;
  Hooks hooks;
  hooks.on_checkpoint = [&](const model::Checkpoint& ck, long step) { snapshots.emplace_back(step, ck); };
  Model straight = make_model(c, f.config, f.vocab.size());
  const std::string full = model::encode_checkpoint(pretrain(straight, f.corpus, f.vocab, c, hooks));
  ASSERT_EQ(snapshots.size(), 2u);
  EXPECT_EQ(snapshots[0].first, 4);

  Model resumed = make_model(c, f.config, f.vocab.size());
  const std::string again = model::encode_checkpoint(pretrain(resumed, f.corpus, f.vocab, c, {}, &snapshots[0].second));
  EXPECT_EQ(again, full);
}

TEST(Loops, PretrainRejectsMismatchedVocabulary) {
  const PretrainFixture f = pretrain_fixture();
  TrainConfig c;
  Model m = make_model(c, f.config, f.vocab.size() + 1);
  EXPECT_THROW(pretrain(m, f.corpus, f.vocab, c), trelab::ConfigError);
}

TEST(Loops, FinetuneRecordsLabelsAndValidation) {
  const PretrainFixture f = pretrain_fixture();
  TrainConfig pc;
  pc.epochs = 1;
  pc.batch_size = 4;
  Model m = make_model(pc, f.config, f.vocab.size());
  const model::Checkpoint base = pretrain(m, f.corpus, f.vocab, pc);

  const data::Dataset train = data::synthetic::make_toy_relations(12, 4);
  TrainConfig fc;
  fc.epochs = 2;
  fc.batch_size = 4;
  fc.peak_lr = 1e-3;
  fc.masking = data::MaskingStrategy::kNeGr;
  int epochs_seen = 0;
  Hooks hooks;
  hooks.on_epoch = [&](const EpochReport& r) { epochs_seen = r.epoch; };
  FinetuneResult r = finetune(&base, f.vocab, train, nullptr, fc, {}, hooks);
  EXPECT_EQ(r.labels, train.labels);
  EXPECT_EQ(r.epochs.size(), 2u);
  EXPECT_EQ(epochs_seen, 2);
  EXPECT_TRUE(r.vocab.find("<subj-PERSON>").has_value());
  EXPECT_TRUE(r.vocab.find("<clf>").has_value());
  EXPECT_EQ(*r.checkpoint.meta("kind"), "finetuned");

  Classifier c = load_classifier(r.checkpoint);
  EXPECT_EQ(c.masking, data::MaskingStrategy::kNeGr);
  EXPECT_EQ(c.predict_labels(train).size(), train.size());

  bpe::Vocab other = bpe::train_bpe(std::vector<std::string>{"something else"}, 30);
  EXPECT_THROW(finetune(&base, other, train, nullptr, fc), trelab::ConfigError);
  EXPECT_THROW(load_classifier(base), trelab::ConfigError);
}

}  // namespace
