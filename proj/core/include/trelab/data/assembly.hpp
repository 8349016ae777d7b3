// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "trelab/bpe/vocab.hpp"
#include "trelab/data/dataset.hpp"
#include "trelab/data/masking.hpp"

namespace trelab::data {

// The four structural tokens of the fine-tuning input.
std::vector<std::string> task_special_tokens();

// [START, a¹, DELIM1, a², DELIM2, sentence, CLF] with a¹ the subject.
struct EncodedExample {
  std::vector<int> ids;
  int label_id = -1;
  // lm_targets[i] == ids[i+1]; the final position holds kIgnoreTarget.
  std::vector<int> lm_targets;
  // [sentence_begin, sentence_end) indexes the sentence segment of `ids`.
  std::size_t sentence_begin = 0;
  std::size_t sentence_end = 0;
  bool truncated = false;
};

inline constexpr int kIgnoreTarget = -1;

// BPE ids for a word list. Mask tokens map to their reserved id (falling back
// to the UNK mask, then the unknown id, when the vocabulary lacks them); other
// words are BPE-encoded.
std::vector<int> encode_words(const bpe::Vocab& vocab, const std::vector<std::string>& words);

// Overlong inputs lose sentence tokens from the right; a LengthError is raised
// only when the arguments and structural tokens alone exceed `max_positions`.
EncodedExample assemble_input(const RelationInstance& instance, const bpe::Vocab& vocab, int label_id,
                              std::size_t max_positions);

struct AssembledSet {
  std::vector<EncodedExample> examples;
  std::size_t truncated = 0;
};

// Masks and assembles every instance; labels are mapped through `labels`
// (an unknown label is a ValidationError).
AssembledSet assemble_dataset(const Dataset& dataset, MaskingStrategy strategy,
                              const std::vector<std::string>& labels, const bpe::Vocab& vocab,
                              std::size_t max_positions);

// Plain-text sequences for language-model pre-training, truncated to the window.
std::vector<std::vector<int>> encode_corpus(const std::vector<std::string>& sentences, const bpe::Vocab& vocab,
                                            std::size_t max_positions);

}  // namespace trelab::data
