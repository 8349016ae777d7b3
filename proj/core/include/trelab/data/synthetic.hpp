// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "trelab/data/dataset.hpp"

// A templated relation task with known structure, used for training-run
// checks where the real corpora are too large.
//
// Every sentence reads "[prefix] SUBJ VERB OBJ [suffix] ." Names carry a type
// suffix (-son PERSON, -corp ORG, -burg CITY, -ist TITLE). The type pair picks
// which of four relations holds; the verb class (linking or non-linking) picks
// between that relation and no_relation. Verbs of both classes are drawn from
// the same syllables, so only their contexts tell them apart.
//
// The labeled training split uses a few verbs per class. Validation draws from
// all verbs, and the pre-training corpus shows every verb followed by a
// class-specific continuation ("and ..." vs "but ...").
namespace trelab::data::synthetic {

struct Options {
  std::uint64_t seed = 7;
  std::size_t pretrain_sentences = 2000;
  std::size_t train_examples = 200;
  std::size_t valid_examples = 300;
  std::size_t names_per_type = 24;  // per pool; a second pool is held out
  std::size_t verbs_per_class = 16;
  std::size_t seen_verbs_per_class = 8;
};

struct Task {
  std::vector<std::string> pretrain_corpus;
  Dataset train;
  // Entities from the training pool.
  Dataset valid;
  // Entities never seen in the corpus or the training split.
  Dataset valid_unseen;
};

Task make_task(const Options& options = {});

// The four relation labels plus no_relation, sorted.
std::vector<std::string> labels();

// `n` sentences whose first word is unique, so that a language model can
// drive its loss to zero on them.
std::vector<std::string> make_memorization_corpus(std::size_t n, std::uint64_t seed);

// `n` labeled examples; labels are a deterministic function of the input.
Dataset make_toy_relations(std::size_t n, std::uint64_t seed);

}  // namespace trelab::data::synthetic
