// SPDX-License-Identifier: Apache-2.0
#include <map>
#include <set>

#include "trelab/bpe/vocab.hpp"
#include "trelab/error.hpp"

namespace trelab::bpe {
namespace {

struct WordEntry {
  std::vector<std::string> symbols;
  long count = 0;
};

std::map<std::string, long> count_words(std::span<const std::string> corpus) {
  std::map<std::string, long> counts;
  for (const std::string& sentence : corpus) {
    for (std::string& word : split_words(normalize_text(sentence))) ++counts[std::move(word)];
  }
  return counts;
}

}  // namespace

std::vector<std::string> base_symbols(std::span<const std::string> corpus) {
  std::set<std::string> symbols;
  for (const auto& [word, count] : count_words(corpus)) {
    for (const std::string& ch : split_characters(word)) {
      symbols.insert(ch);
      symbols.insert(ch + std::string(kEndOfWord));
    }
  }
  std::vector<std::string> out{std::string(kUnknown)};
  out.insert(out.end(), symbols.begin(), symbols.end());
  return out;
}

Vocab train_bpe(std::span<const std::string> corpus, std::size_t target_size) {
  const std::map<std::string, long> word_counts = count_words(corpus);
  if (word_counts.empty()) throw InputError("BPE training corpus is empty");

  std::vector<std::string> tokens = base_symbols(corpus);
  if (target_size < tokens.size()) {
    throw InputError("target vocabulary size " + std::to_string(target_size) + " is below the " +
                     std::to_string(tokens.size()) + " base symbols");
  }
  std::set<std::string> known(tokens.begin(), tokens.end());

  std::vector<WordEntry> words;
  words.reserve(word_counts.size());
  for (const auto& [word, count] : word_counts) {
    WordEntry entry{split_characters(word), count};
    entry.symbols.back() += kEndOfWord;
    words.push_back(std::move(entry));
  }

  std::vector<MergePair> merges;
  while (tokens.size() < target_size) {
    std::map<MergePair, long> pair_counts;
    for (const WordEntry& w : words) {
      for (std::size_t i = 0; i + 1 < w.symbols.size(); ++i) pair_counts[{w.symbols[i], w.symbols[i + 1]}] += w.count;
    }
    if (pair_counts.empty()) break;
    // std::map iterates in lexicographic order, so the first maximum wins ties.
    auto best = pair_counts.begin();
    for (auto it = pair_counts.begin(); it != pair_counts.end(); ++it)
      if (it->second > best->second) best = it;
    const MergePair pair = best->first;
    const std::string product = pair.first + pair.second;
    merges.push_back(pair);
    if (known.insert(product).second) tokens.push_back(product);

    for (WordEntry& w : words) {
      std::vector<std::string> merged;
      merged.reserve(w.symbols.size());
      for (std::size_t i = 0; i < w.symbols.size();) {
        if (i + 1 < w.symbols.size() && w.symbols[i] == pair.first && w.symbols[i + 1] == pair.second) {
          merged.push_back(product);
          i += 2;
        } else {
          merged.push_back(std::move(w.symbols[i]));
          ++i;
        }
      }
      w.symbols = std::move(merged);
    }
  }
  return Vocab(std::move(tokens), std::move(merges), {std::string(kUnknown)});
}

}  // namespace trelab::bpe
