// SPDX-License-Identifier: Apache-2.0
#include "trelab/data/assembly.hpp"

#include "trelab/error.hpp"

namespace trelab::data {

std::vector<std::string> task_special_tokens() {
  return {std::string(bpe::kStart), std::string(bpe::kDelim1), std::string(bpe::kDelim2),
          std::string(bpe::kClassify)};
}

std::vector<int> encode_words(const bpe::Vocab& vocab, const std::vector<std::string>& words) {
  std::vector<int> ids;
  std::string pending;  // consecutive ordinary words are encoded together
  auto flush = [&] {
    if (pending.empty()) return;
    const bpe::Encoding enc = vocab.encode(pending);
    ids.insert(ids.end(), enc.ids.begin(), enc.ids.end());
    pending.clear();
  };
  for (const std::string& word : words) {
    if (is_mask_token(word)) {
      flush();
      if (auto id = vocab.find(word); id && vocab.is_special(*id)) {
        ids.push_back(*id);
      } else if (auto generic = vocab.find("<mask>"); generic && vocab.is_special(*generic)) {
        ids.push_back(*generic);
      } else {
        ids.push_back(vocab.unknown_id());
      }
      continue;
    }
    if (!pending.empty()) pending.push_back(' ');
    pending += word;
  }
  flush();
  return ids;
}

namespace {

std::vector<std::string> span_words(const RelationInstance& inst, const Argument& arg) {
  return {inst.tokens.begin() + static_cast<std::ptrdiff_t>(arg.begin),
          inst.tokens.begin() + static_cast<std::ptrdiff_t>(arg.end + 1)};
}

}  // namespace

EncodedExample assemble_input(const RelationInstance& instance, const bpe::Vocab& vocab, int label_id,
                              std::size_t max_positions) {
  validate(instance);
  const int start = vocab.id(bpe::kStart);
  const int delim1 = vocab.id(bpe::kDelim1);
  const int delim2 = vocab.id(bpe::kDelim2);
  const int classify = vocab.id(bpe::kClassify);

  const std::vector<int> first = encode_words(vocab, span_words(instance, instance.subject()));
  const std::vector<int> second = encode_words(vocab, span_words(instance, instance.object()));
  std::vector<int> sentence = encode_words(vocab, instance.tokens);

  const std::size_t fixed = first.size() + second.size() + 4;
  if (fixed > max_positions) {
    throw LengthError("arguments alone need " + std::to_string(fixed) + " positions; the window is " +
                      std::to_string(max_positions));
  }
  EncodedExample ex;
  ex.label_id = label_id;
  if (fixed + sentence.size() > max_positions) {
    sentence.resize(max_positions - fixed);
    ex.truncated = true;
  }
  ex.ids.reserve(fixed + sentence.size());
  ex.ids.push_back(start);
  ex.ids.insert(ex.ids.end(), first.begin(), first.end());
  ex.ids.push_back(delim1);
  ex.ids.insert(ex.ids.end(), second.begin(), second.end());
  ex.ids.push_back(delim2);
  ex.sentence_begin = ex.ids.size();
  ex.ids.insert(ex.ids.end(), sentence.begin(), sentence.end());
  ex.sentence_end = ex.ids.size();
  ex.ids.push_back(classify);

  ex.lm_targets.assign(ex.ids.begin() + 1, ex.ids.end());
  ex.lm_targets.push_back(kIgnoreTarget);
  return ex;
}

AssembledSet assemble_dataset(const Dataset& dataset, MaskingStrategy strategy,
                              const std::vector<std::string>& labels, const bpe::Vocab& vocab,
                              std::size_t max_positions) {
  AssembledSet out;
  out.examples.reserve(dataset.size());
  for (const RelationInstance& inst : dataset.instances) {
    int label_id = -1;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == inst.label) label_id = static_cast<int>(i);
    if (label_id < 0) throw ValidationError("label '" + inst.label + "' is not in the model's label set");
    EncodedExample ex = assemble_input(apply_masking(inst, strategy), vocab, label_id, max_positions);
    if (ex.truncated) ++out.truncated;
    out.examples.push_back(std::move(ex));
  }
  return out;
}

std::vector<std::vector<int>> encode_corpus(const std::vector<std::string>& sentences, const bpe::Vocab& vocab,
                                            std::size_t max_positions) {
  std::vector<std::vector<int>> out;
  out.reserve(sentences.size());
  for (const std::string& s : sentences) {
    std::vector<int> ids = vocab.encode(s).ids;
    if (ids.size() > max_positions) ids.resize(max_positions);
    if (ids.size() >= 2) out.push_back(std::move(ids));
  }
  return out;
}

}  // namespace trelab::data
