// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "trelab/error.hpp"
#include "trelab/model/checkpoint.hpp"
#include "trelab/model/transformer.hpp"

namespace {

using namespace trelab::model;

ModelConfig small_config() {
  ModelConfig c;
  c.n_layers = 2;
  c.n_heads = 2;
  c.d_model = 8;
  c.d_ff = 16;
  c.vocab_size = 13;
  c.max_positions = 10;
  c.n_relations = 3;
  return c;
}

std::vector<int> random_ids(Rng& rng, std::size_t n, int vocab) {
  std::vector<int> ids(n);
  for (int& id : ids) id = static_cast<int>(rng.below(static_cast<std::uint64_t>(vocab)));
  return ids;
}

TEST(Config, RejectsInconsistentDimensions) {
  ModelConfig c = small_config();
  c.n_heads = 3;
  EXPECT_THROW(c.validate(), trelab::ConfigError);
  c = small_config();
  c.residual_dropout = 1.0;
  EXPECT_THROW(c.validate(), trelab::ConfigError);
}

TEST(Init, StatisticsAndConstants) {
  ModelConfig c = small_config();
  c.d_model = 64;
  c.d_ff = 128;
  c.vocab_size = 200;
  Rng rng(1);
  Model m = init_model(c, rng);
  double sum = 0.0, sq = 0.0;
  const Tensor& e = m.lm.token_embedding.value;
  for (double v : e.data()) {
    sum += v;
    sq += v * v;
  }
  const double n = static_cast<double>(e.size());
  EXPECT_NEAR(sum / n, 0.0, 0.001);
  EXPECT_NEAR(std::sqrt(sq / n), 0.02, 0.0005);
  for (double v : m.lm.blocks[0].ln1_gain.value.data()) EXPECT_EQ(v, 1.0);
  for (double v : m.lm.blocks[1].fc_bias.value.data()) EXPECT_EQ(v, 0.0);
  for (double v : m.head.bias.value.data()) EXPECT_EQ(v, 0.0);
}

TEST(Init, ParameterCountMatchesFormula) {
  const ModelConfig c = small_config();
  Rng rng(2);
  Model m = init_model(c, rng);
  const std::size_t d = 8, ff = 16, V = 13, P = 10, L = 2, R = 3;
  const std::size_t block = d * 3 * d + 3 * d + d * d + d + 2 * d + d * ff + ff + ff * d + d + 2 * d;
  EXPECT_EQ(m.parameter_count(), V * d + P * d + L * block + d * R + R);
}

TEST(Forward, OutputShapes) {
  Rng rng(3);
  Model m = init_model(small_config(), rng);
  const std::vector<int> ids = {1, 4, 2, 7, 12};
  EXPECT_EQ(forward_lm(m, ids, false, rng).shape(), (trelab::numerics::Shape{5, 13}));
  EXPECT_EQ(forward_relation(m, ids, 12, false, rng).size(), 3u);
  EXPECT_THROW(forward_relation(m, ids, 11, false, rng), trelab::ContractError);
}

TEST(Forward, RejectsBadSequences) {
  Rng rng(4);
  Model m = init_model(small_config(), rng);
  EXPECT_THROW(forward_lm(m, std::vector<int>(11, 1), false, rng), trelab::LengthError);
  EXPECT_THROW(forward_lm(m, std::vector<int>{1, 13}, false, rng), trelab::IndexError);
  EXPECT_THROW(forward_lm(m, std::vector<int>{}, false, rng), trelab::InputError);
}

TEST(Forward, EvalModeIsDeterministic) {
  Rng rng(5);
  Model m = init_model(small_config(), rng);
  const std::vector<int> ids = random_ids(rng, 6, 13);
  Rng a(1), b(2);
  EXPECT_EQ(forward_lm(m, ids, false, a), forward_lm(m, ids, false, b));
}

TEST(Forward, TrainModeUsesDropout) {
  ModelConfig c = small_config();
  c.residual_dropout = 0.5;
  Rng rng(6);
  Model m = init_model(c, rng);
  const std::vector<int> ids = random_ids(rng, 6, 13);
  Rng a(1), b(2);
  EXPECT_NE(forward_lm(m, ids, true, a), forward_lm(m, ids, true, b));
}

TEST(Causality, FutureTokensDoNotChangePastLogits) {
  Rng rng(7);
  Model m = init_model(small_config(), rng);
  for (int probe = 0; probe < 20; ++probe) {
    std::vector<int> ids = random_ids(rng, 10, 13);
    const std::size_t p = rng.below(9);
    const Tensor before = forward_lm(m, ids, false, rng);
    for (std::size_t j = p + 1; j < ids.size(); ++j) ids[j] = static_cast<int>(rng.below(13));
    const Tensor after = forward_lm(m, ids, false, rng);
    for (std::size_t q = 0; q <= p; ++q)
      for (std::size_t v = 0; v < 13; ++v) ASSERT_EQ(before(q, v), after(q, v)) << "probe " << probe;
  }
}

TEST(Causality, AttentionWeightsAreLowerTriangular) {
  Rng rng(8);
  Model m = init_model(small_config(), rng);
  Tape tape;
  AttentionTrace trace;
  forward_hidden(tape, m.lm, random_ids(rng, 7, 13), false, rng, &trace);
  ASSERT_EQ(trace.weights.size(), 2u);
  for (const auto& block : trace.weights) {
    ASSERT_EQ(block.size(), 2u);
    for (const Tensor& w : block) {
      for (std::size_t i = 0; i < 7; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < 7; ++j) {
          if (j > i) EXPECT_EQ(w(i, j), 0.0);
          row += w(i, j);
        }
        EXPECT_NEAR(row, 1.0, 1e-12);
      }
    }
  }
}

TEST(Tying, SingleVocabularyMatrix) {
  Rng rng(9);
  Model m = init_model(small_config(), rng);
  int count = 0;
  for (Parameter* p : m.parameters()) count += p->value.shape() == trelab::numerics::Shape{13, 8};
  EXPECT_EQ(count, 1);
  EXPECT_EQ(&m.lm.output_projection(), &m.lm.token_embedding);
}

TEST(Tying, GradientIsSumOfUntiedTwins) {
  Rng rng(10);
  Model m = init_model(small_config(), rng);
  const std::vector<int> ids = random_ids(rng, 8, 13);
  std::vector<int> targets(ids.begin() + 1, ids.end());
  targets.push_back(-1);

  for (Parameter* p : m.parameters()) p->grad = Tensor(p->value.shape());
  {
    Tape tape;
    Rng r(0);
    Var h = forward_hidden(tape, m.lm, ids, false, r);
    tape.backward(trelab::numerics::cross_entropy(lm_logits(tape, h, m.lm.token_embedding), targets));
  }
  const Tensor tied = m.lm.token_embedding.grad;

  Parameter twin("twin", m.lm.token_embedding.value);
  twin.grad = Tensor(twin.value.shape());
  m.lm.token_embedding.grad = Tensor(twin.value.shape());
  {
    Tape tape;
    Rng r(0);
    Var h = forward_hidden(tape, m.lm, ids, false, r);
    tape.backward(trelab::numerics::cross_entropy(lm_logits(tape, h, twin), targets));
  }
  for (std::size_t i = 0; i < tied.size(); ++i)
    EXPECT_NEAR(tied[i], m.lm.token_embedding.grad[i] + twin.grad[i], 1e-12);
}

TEST(Resize, GrowVocabularyKeepsExistingRows) {
  Rng rng(11);
  Model m = init_model(small_config(), rng);
  const Tensor before = m.lm.token_embedding.value;
  grow_vocabulary(m, 16, rng);
  EXPECT_EQ(m.config().vocab_size, 16);
  EXPECT_EQ(m.lm.token_embedding.value.shape(), (trelab::numerics::Shape{16, 8}));
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(m.lm.token_embedding.value[i], before[i]);
  EXPECT_THROW(grow_vocabulary(m, 15, rng), trelab::ConfigError);
}

TEST(Resize, ResetRelationHead) {
  Rng rng(12);
  Model m = init_model(small_config(), rng);
  reset_relation_head(m, 5, rng);
  EXPECT_EQ(m.head.num_relations(), 5u);
  EXPECT_EQ(m.config().n_relations, 5);
  EXPECT_THROW(reset_relation_head(m, 0, rng), trelab::ConfigError);
}

Checkpoint sample_checkpoint(Model& m) {
  Checkpoint ck;
  ck.config = m.config();
  ck.vocab_fingerprint = "0123456789abcdef";
  ck.metadata["kind"] = "test";
  ck.metadata["text"] = "line one\nline \"two\"";
  ck.tensors = model_tensors(m);
  return ck;
}

TEST(Checkpoint, RoundTripRestoresIdenticalModel) {
  Rng rng(13);
  Model m = init_model(small_config(), rng);
  const std::string bytes = encode_checkpoint(sample_checkpoint(m));
  const Checkpoint back = decode_checkpoint(bytes);
  EXPECT_EQ(back.config, m.config());
  EXPECT_EQ(*back.meta("text"), "line one\nline \"two\"");
  EXPECT_EQ(encode_checkpoint(back), bytes);

  Model restored = restore_model(back);
  const std::vector<int> ids = {3, 1, 4, 1, 5};
  EXPECT_EQ(forward_relation(restored, std::vector<int>{3, 1, 4}, 4, false, rng),
            forward_relation(m, std::vector<int>{3, 1, 4}, 4, false, rng));
  EXPECT_EQ(forward_lm(restored, ids, false, rng), forward_lm(m, ids, false, rng));
}

TEST(Checkpoint, FileRoundTrip) {
  Rng rng(14);
  Model m = init_model(small_config(), rng);
  const auto path = std::filesystem::temp_directory_path() / "trelab_model_test.ckpt";
  write_checkpoint(sample_checkpoint(m), path);
  EXPECT_EQ(encode_checkpoint(read_checkpoint(path)), encode_checkpoint(sample_checkpoint(m)));
  std::filesystem::remove(path);
  EXPECT_THROW(read_checkpoint(path), trelab::InputError);
}

TEST(Checkpoint, CorruptionIsDetected) {
  Rng rng(15);
  Model m = init_model(small_config(), rng);
  const std::string bytes = encode_checkpoint(sample_checkpoint(m));
  EXPECT_THROW(decode_checkpoint(""), trelab::ParseError);
  EXPECT_THROW(decode_checkpoint("trelab-ckpt v9\n" + bytes.substr(15)), trelab::ParseError);
  EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() - 8)), trelab::ParseError);
  EXPECT_THROW(decode_checkpoint(bytes + "x"), trelab::ParseError);
  std::string bad_header = bytes;
  bad_header[bytes.find('{') + 1] = '#';
  EXPECT_THROW(decode_checkpoint(bad_header), trelab::ParseError);
}

TEST(Checkpoint, RestoreRejectsMissingOrMisshapenTensor) {
  Rng rng(16);
  Model m = init_model(small_config(), rng);
  Checkpoint ck = sample_checkpoint(m);
  ck.tensors.pop_back();
  EXPECT_THROW(restore_model(ck), trelab::ParseError);
  ck = sample_checkpoint(m);
  ck.tensors[0].value = Tensor({2, 2});
  EXPECT_THROW(restore_model(ck), trelab::ParseError);
}

}  // namespace
