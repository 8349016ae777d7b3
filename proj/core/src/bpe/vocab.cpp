// SPDX-License-Identifier: Apache-2.0
#include "trelab/bpe/vocab.hpp"

#include <charconv>
#include <climits>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "trelab/error.hpp"

namespace trelab::bpe {
namespace {

struct Symbol {
  std::string text;
  std::size_t begin;
  std::size_t end;
};

std::vector<Symbol> initial_symbols(std::string_view word, std::size_t base_offset) {
  std::vector<Symbol> symbols;
  std::size_t pos = base_offset;
  for (std::string& ch : split_characters(word)) {
    const std::size_t len = ch.size();
    symbols.push_back(Symbol{std::move(ch), pos, pos + len});
    pos += len;
  }
  if (!symbols.empty()) symbols.back().text += kEndOfWord;
  return symbols;
}

bool ends_with_marker(const std::string& token) {
  return token.size() >= kEndOfWord.size() &&
         token.compare(token.size() - kEndOfWord.size(), kEndOfWord.size(), kEndOfWord) == 0;
}

}  // namespace

Vocab::Vocab(std::vector<std::string> tokens, std::vector<MergePair> merges, std::vector<std::string> specials)
    : tokens_(std::move(tokens)), merges_(std::move(merges)), special_flags_(tokens_.size(), false) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) throw ValidationError("empty token at id " + std::to_string(i));
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw ValidationError("duplicate token '" + tokens_[i] + "'");
    }
  }
  for (const std::string& name : specials) {
    auto it = index_.find(name);
    if (it == index_.end()) throw ValidationError("special token '" + name + "' is not in the vocabulary");
    special_flags_[static_cast<std::size_t>(it->second)] = true;
  }
  for (std::size_t r = 0; r < merges_.size(); ++r) {
    const auto& [left, right] = merges_[r];
    for (const std::string* part : {&left, &right}) {
      auto it = index_.find(*part);
      if (it == index_.end()) throw ValidationError("merge operand '" + *part + "' is not in the vocabulary");
      if (special_flags_[static_cast<std::size_t>(it->second)]) {
        throw ValidationError("special token '" + *part + "' cannot take part in a merge");
      }
    }
    if (!index_.contains(left + right)) {
      throw ValidationError("merge product '" + left + right + "' is not in the vocabulary");
    }
    if (!ranks_.emplace(merges_[r], static_cast<int>(r)).second) {
      throw ValidationError("duplicate merge '" + left + "' '" + right + "'");
    }
  }
}

std::vector<std::string> Vocab::specials() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < tokens_.size(); ++i)
    if (special_flags_[i]) out.push_back(tokens_[i]);
  return out;
}

std::optional<int> Vocab::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int Vocab::id(std::string_view token) const {
  auto found = find(token);
  if (!found) throw IndexError("token '" + std::string(token) + "' is not in the vocabulary");
  return *found;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw IndexError("token id " + std::to_string(id) + " outside vocabulary of " + std::to_string(tokens_.size()));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::optional<int> Vocab::merge_rank(const std::string& left, const std::string& right) const {
  auto it = ranks_.find(MergePair{left, right});
  if (it == ranks_.end()) return std::nullopt;
  return it->second;
}

bool Vocab::is_special(int id) const {
  return id >= 0 && static_cast<std::size_t>(id) < special_flags_.size() && special_flags_[static_cast<std::size_t>(id)];
}

int Vocab::unknown_id() const {
  auto found = find(kUnknown);
  if (!found) throw ContractError("vocabulary has no unknown token");
  return *found;
}

namespace {

// Repeatedly merges the lowest-ranked adjacent pair (all its occurrences, left
// to right) until no ranked pair remains.
template <typename RankFn>
void apply_merges(std::vector<Symbol>& symbols, RankFn&& rank_of) {
  while (symbols.size() > 1) {
    int best = INT_MAX;
    std::size_t at = 0;
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      const auto rank = rank_of(symbols[i].text, symbols[i + 1].text);
      if (rank && *rank < best) {
        best = *rank;
        at = i;
      }
    }
    if (best == INT_MAX) return;
    const std::string left = symbols[at].text;
    const std::string right = symbols[at + 1].text;
    std::vector<Symbol> merged;
    merged.reserve(symbols.size());
    for (std::size_t i = 0; i < symbols.size();) {
      if (i + 1 < symbols.size() && symbols[i].text == left && symbols[i + 1].text == right) {
        merged.push_back(Symbol{left + right, symbols[i].begin, symbols[i + 1].end});
        i += 2;
      } else {
        merged.push_back(std::move(symbols[i]));
        ++i;
      }
    }
    symbols = std::move(merged);
  }
}

}  // namespace

Encoding Vocab::encode(std::string_view text) const {
  const std::string normalized = normalize_text(text);
  Encoding enc;
  const int unk = unknown_id();
  std::size_t i = 0;
  while (i < normalized.size()) {
    std::size_t j = normalized.find(' ', i);
    if (j == std::string::npos) j = normalized.size();
    std::vector<Symbol> symbols = initial_symbols(std::string_view(normalized).substr(i, j - i), i);
    apply_merges(symbols, [this](const std::string& l, const std::string& r) { return merge_rank(l, r); });
    for (const Symbol& s : symbols) {
      auto found = index_.find(s.text);
      enc.ids.push_back(found == index_.end() ? unk : found->second);
      enc.offsets.emplace_back(s.begin, s.end);
    }
    i = j + 1;
  }
  return enc;
}

std::vector<int> Vocab::encode_word(std::string_view word) const {
  return encode(word).ids;
}

std::string Vocab::decode(std::span<const int> ids) const {
  std::string out;
  for (int id : ids) {
    const std::string& tok = token(id);
    if (is_special(id)) {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
      out += tok;
      out.push_back(' ');
    } else if (ends_with_marker(tok)) {
      out.append(tok, 0, tok.size() - kEndOfWord.size());
      out.push_back(' ');
    } else {
      out += tok;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::string Vocab::serialize() const {
  std::string out = "bpe-vocab v1 " + std::to_string(tokens_.size()) + " " + std::to_string(merges_.size()) + "\n";
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    out += std::to_string(i);
    out += '\t';
    out += tokens_[i];
    out += '\n';
  }
  for (const auto& [left, right] : merges_) {
    out += left;
    out += '\t';
    out += right;
    out += '\n';
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!special_flags_[i]) continue;
    out += "special\t" + tokens_[i] + "\t" + std::to_string(i) + "\n";
  }
  return out;
}

namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  throw ParseError("vocab line " + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

bool parse_size(std::string_view text, std::size_t& out) {
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end && !text.empty();
}

}  // namespace

Vocab Vocab::parse(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  if (lines.empty()) parse_fail(1, "empty file");

  std::istringstream header{std::string(lines[0])};
  std::string magic, version;
  std::size_t vocab_size = 0, merge_count = 0;
  if (!(header >> magic >> version >> vocab_size >> merge_count) || magic != "bpe-vocab" || version != "v1") {
    parse_fail(1, "expected 'bpe-vocab v1 <V> <num_merges>'");
  }
  std::string trailing;
  if (header >> trailing) parse_fail(1, "unexpected trailing header field '" + trailing + "'");
  if (lines.size() < 1 + vocab_size + merge_count) parse_fail(lines.size(), "file truncated");

  std::vector<std::string> tokens;
  std::set<std::string_view> seen;
  for (std::size_t i = 0; i < vocab_size; ++i) {
    const std::size_t line_no = i + 2;
    const auto fields = split_tabs(lines[i + 1]);
    std::size_t id = 0;
    if (fields.size() != 2 || !parse_size(fields[0], id)) parse_fail(line_no, "expected '<id>\\t<token>'");
    if (id != i) parse_fail(line_no, "ids must be dense; expected " + std::to_string(i));
    if (fields[1].empty()) parse_fail(line_no, "empty token");
    if (!seen.insert(fields[1]).second) parse_fail(line_no, "duplicate token '" + std::string(fields[1]) + "'");
    tokens.emplace_back(fields[1]);
  }

  std::vector<MergePair> merges;
  std::set<std::string_view> token_set(seen);
  for (std::size_t r = 0; r < merge_count; ++r) {
    const std::size_t line_no = vocab_size + r + 2;
    const auto fields = split_tabs(lines[vocab_size + r + 1]);
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) parse_fail(line_no, "expected '<left>\\t<right>'");
    if (!token_set.contains(fields[0]) || !token_set.contains(fields[1])) parse_fail(line_no, "merge of unknown token");
    merges.emplace_back(std::string(fields[0]), std::string(fields[1]));
  }

  std::vector<std::string> specials;
  for (std::size_t i = 1 + vocab_size + merge_count; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (lines[i].empty()) {
      if (i + 1 == lines.size()) break;
      parse_fail(line_no, "blank line");
    }
    const auto fields = split_tabs(lines[i]);
    std::size_t id = 0;
    if (fields.size() != 3 || fields[0] != "special" || !parse_size(fields[2], id)) {
      parse_fail(line_no, "expected 'special\\t<name>\\t<id>'");
    }
    if (id >= tokens.size() || tokens[id] != fields[1]) parse_fail(line_no, "special token does not match its id");
    specials.emplace_back(fields[1]);
  }
  try {
    return Vocab(std::move(tokens), std::move(merges), std::move(specials));
  } catch (const ValidationError& e) {
    throw ParseError(std::string("vocab: ") + e.what());
  }
}

std::string Vocab::fingerprint() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(serialize())));
  return buf;
}

Vocab extend_with_special_tokens(const Vocab& vocab, std::span<const std::string> names) {
  std::vector<std::string> tokens = vocab.tokens();
  std::vector<std::string> specials = vocab.specials();
  std::set<std::string> added;
  for (const std::string& name : names) {
    if (name.empty()) throw InputError("special token name must not be empty");
    if (vocab.find(name) || !added.insert(name).second) {
      throw InputError("special token '" + name + "' already exists");
    }
    tokens.push_back(name);
    specials.push_back(name);
  }
  return Vocab(std::move(tokens), vocab.merges(), std::move(specials));
}

void save_vocab(const Vocab& vocab, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write vocabulary to " + path.string());
  const std::string text = vocab.serialize();
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("failed writing " + path.string());
}

Vocab load_vocab(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read vocabulary " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return Vocab::parse(buf.str());
}

}  // namespace trelab::bpe
