// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace trelab::bpe {

// Suffix carried by the final symbol of every word.
inline constexpr std::string_view kEndOfWord = "</w>";
// Reserved id 0 of every trained vocabulary; stands in for unseen characters.
inline constexpr std::string_view kUnknown = "<unk>";

// Task tokens added for fine-tuning.
inline constexpr std::string_view kStart = "<start>";
inline constexpr std::string_view kDelim1 = "<delim1>";
inline constexpr std::string_view kDelim2 = "<delim2>";
inline constexpr std::string_view kClassify = "<clf>";

using MergePair = std::pair<std::string, std::string>;

// Token ids plus the byte span of each id in the normalized text.
// Special tokens carry an empty span.
struct Encoding {
  std::vector<int> ids;
  std::vector<std::pair<std::size_t, std::size_t>> offsets;
};

// Sub-word vocabulary: dense ids, an ordered merge table (rank = position),
// and a set of special tokens that never take part in merges.
class Vocab {
 public:
  Vocab() = default;
  // Validates the invariants: unique tokens, merges whose halves exist and
  // whose concatenation is a token, specials naming existing ids.
  Vocab(std::vector<std::string> tokens, std::vector<MergePair> merges, std::vector<std::string> specials);

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const std::vector<MergePair>& merges() const noexcept { return merges_; }
  // Special token surface forms, ordered by id.
  std::vector<std::string> specials() const;

  std::optional<int> find(std::string_view token) const;
  // Like find() but throws IndexError for a missing token.
  int id(std::string_view token) const;
  const std::string& token(int id) const;
  std::optional<int> merge_rank(const std::string& left, const std::string& right) const;
  bool is_special(int id) const;
  int unknown_id() const;

  // Normalizes `text`, splits it into words on whitespace and applies the
  // merges in rank order within each word. Offsets index the normalized text.
  Encoding encode(std::string_view text) const;
  std::vector<int> encode_word(std::string_view word) const;
  std::string decode(std::span<const int> ids) const;

  std::string serialize() const;
  static Vocab parse(std::string_view text);
  // 16 hex digits identifying serialize().
  std::string fingerprint() const;

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.tokens_ == b.tokens_ && a.merges_ == b.merges_ && a.special_flags_ == b.special_flags_;
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<MergePair> merges_;
  std::vector<bool> special_flags_;
  std::unordered_map<std::string, int> index_;
  std::map<MergePair, int> ranks_;
};

// Learns merges greedily by pair frequency until the vocabulary reaches
// `target_size` or no adjacent pair remains. Equal counts are broken by the
// lexicographically smallest (left, right) pair.
Vocab train_bpe(std::span<const std::string> corpus, std::size_t target_size);

// Base vocabulary of a corpus: the unknown token plus, for every character,
// its word-internal and word-final forms.
std::vector<std::string> base_symbols(std::span<const std::string> corpus);

// Appends special tokens after the existing ids; merges are untouched.
Vocab extend_with_special_tokens(const Vocab& vocab, std::span<const std::string> names);

void save_vocab(const Vocab& vocab, const std::filesystem::path& path);
Vocab load_vocab(const std::filesystem::path& path);

// Unicode NFC followed by whitespace collapsing (words joined by one space).
std::string normalize_text(std::string_view text);
std::vector<std::string> split_words(std::string_view normalized);
// Splits a UTF-8 word into code points.
std::vector<std::string> split_characters(std::string_view word);

// FNV-1a, used for vocabulary fingerprints.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace trelab::bpe
