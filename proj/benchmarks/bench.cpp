// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "trelab/bpe/vocab.hpp"
#include "trelab/data/assembly.hpp"
#include "trelab/data/synthetic.hpp"
#include "trelab/model/transformer.hpp"
#include "trelab/numerics/tensor.hpp"
#include "trelab/training/losses.hpp"

namespace {

using namespace trelab;

numerics::Tensor random_tensor(numerics::Rng& rng, std::size_t rows, std::size_t cols) {
  numerics::Tensor t(numerics::Shape{rows, cols});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.normal();
  return t;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  numerics::Rng rng(1);
  const numerics::Tensor a = random_tensor(rng, n, n), b = random_tensor(rng, n, n);
  for (auto _ : state) benchmark::DoNotOptimize(numerics::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(64)->Arg(128);

model::ModelConfig bench_config() {
  model::ModelConfig c;
  c.vocab_size = 300;
  c.max_positions = 64;
  c.n_relations = 5;
  return c;
}

void BM_ForwardLm(benchmark::State& state) {
  numerics::Rng rng(2);
  model::Model m = model::init_model(bench_config(), rng);
  std::vector<int> ids(static_cast<std::size_t>(state.range(0)));
  for (int& id : ids) id = static_cast<int>(rng.below(300));
  for (auto _ : state) benchmark::DoNotOptimize(model::forward_lm(m, ids, false, rng));
}
BENCHMARK(BM_ForwardLm)->Arg(16)->Arg(64);

void BM_CombinedLossBackward(benchmark::State& state) {
  numerics::Rng rng(3);
  model::Model m = model::init_model(bench_config(), rng);
  std::vector<data::EncodedExample> batch(8);
  for (auto& ex : batch) {
    for (int i = 0; i < 23; ++i) ex.ids.push_back(static_cast<int>(rng.below(299)));
    ex.ids.push_back(299);
    ex.lm_targets.assign(ex.ids.begin() + 1, ex.ids.end());
    ex.lm_targets.push_back(data::kIgnoreTarget);
    ex.label_id = static_cast<int>(rng.below(5));
    ex.sentence_begin = 1;
    ex.sentence_end = 23;
  }
  for (auto _ : state) {
    numerics::Tape tape;
    const auto terms = training::combined_loss(tape, m, batch, 299, 0.5, true, rng);
    tape.backward(terms.total);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(batch.size()));
}
BENCHMARK(BM_CombinedLossBackward);

void BM_BpeEncode(benchmark::State& state) {
  const auto task = data::synthetic::make_task();
  const bpe::Vocab vocab = bpe::train_bpe(task.pretrain_corpus, 300);
  std::size_t bytes = 0;
  for (auto _ : state) {
    for (std::size_t i = 0; i < 200; ++i) {
      benchmark::DoNotOptimize(vocab.encode(task.pretrain_corpus[i]));
      bytes += task.pretrain_corpus[i].size();
    }
  }
  state.SetBytesProcessed(static_cast<long>(bytes));
}
BENCHMARK(BM_BpeEncode);

void BM_BpeTrain(benchmark::State& state) {
  const auto task = data::synthetic::make_task();
  const std::vector<std::string> corpus(task.pretrain_corpus.begin(), task.pretrain_corpus.begin() + 500);
  for (auto _ : state) benchmark::DoNotOptimize(bpe::train_bpe(corpus, 300));
}
BENCHMARK(BM_BpeTrain);

}  // namespace

BENCHMARK_MAIN();
