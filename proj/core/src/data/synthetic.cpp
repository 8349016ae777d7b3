// SPDX-License-Identifier: Apache-2.0
#include "trelab/data/synthetic.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "trelab/error.hpp"
#include "trelab/numerics/rng.hpp"

namespace trelab::data::synthetic {
namespace {

using numerics::Rng;

enum Type { kPerson, kOrg, kCity, kTitle, kTypeCount };

constexpr std::array<const char*, kTypeCount> kTypeNames = {"PERSON", "ORGANIZATION", "CITY", "TITLE"};
constexpr std::array<const char*, kTypeCount> kTypeSuffix = {"son", "corp", "burg", "ist"};

struct Relation {
  const char* label;
  Type subject;
  Type object;
};

constexpr std::array<Relation, 4> kRelations = {{
    {"org:based_in", kOrg, kCity},
    {"per:born_in", kPerson, kCity},
    {"per:holds_title", kPerson, kTitle},
    {"per:works_for", kPerson, kOrg},
}};

constexpr std::array<const char*, 16> kSyllables = {"ka", "lo", "mi", "ra", "te", "vu", "do", "si",
                                                    "ne", "bo", "pa", "gu", "re", "zo", "fi", "ha"};

const std::vector<std::vector<std::string>> kPrefixes = {
    {}, {}, {"yesterday", ","}, {"in", "the", "spring", ","}, {"reports", "say", "that"}, {"as", "noted", ","}};
const std::vector<std::vector<std::string>> kSuffixes = {{}, {}, {"last", "year"}, {"in", "the", "end"}};
const std::vector<std::vector<std::string>> kLinkedTails = {{"and", "they", "worked", "together"},
                                                            {"and", "it", "lasted"}};
const std::vector<std::vector<std::string>> kUnlinkedTails = {{"but", "it", "was", "denied"},
                                                              {"but", "nobody", "agreed"}};

template <typename T>
const T& pick(const std::vector<T>& items, Rng& rng) {
  return items[rng.below(items.size())];
}

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[rng.below(i)]);
}

// Every distinct stem of `syllables` syllables, in a seeded order.
std::vector<std::string> stems(std::size_t syllables, Rng& rng) {
  std::vector<std::string> out{""};
  for (std::size_t k = 0; k < syllables; ++k) {
    std::vector<std::string> next;
    for (const std::string& s : out)
      for (const char* syl : kSyllables) next.push_back(s + syl);
    out = std::move(next);
  }
  shuffle(out, rng);
  return out;
}

struct Lexicon {
  // names[pool][type]
  std::array<std::array<std::vector<std::string>, kTypeCount>, 2> names;
  // verbs[linked ? 1 : 0]
  std::array<std::vector<std::string>, 2> verbs;
};

Lexicon make_lexicon(const Options& o, std::uint64_t seed) {
  if (o.names_per_type == 0 || o.verbs_per_class == 0 || o.seen_verbs_per_class == 0 ||
      o.seen_verbs_per_class > o.verbs_per_class) {
    throw ConfigError("synthetic task: name and verb counts must be positive, seen verbs within the verb count");
  }
  Rng rng = Rng::derive(seed, 0x1e81c0);
  Lexicon lex;
  const std::vector<std::string> name_stems = stems(2, rng);
  if (name_stems.size() < 2 * o.names_per_type * kTypeCount) throw ConfigError("synthetic task: too many names");
  std::size_t next = 0;
  for (int t = 0; t < kTypeCount; ++t) {
    for (auto& pool : lex.names) {
      for (std::size_t i = 0; i < o.names_per_type; ++i) pool[t].push_back(name_stems[next++] + kTypeSuffix[t]);
    }
  }
  const std::vector<std::string> verb_stems = stems(3, rng);
  if (verb_stems.size() < 2 * o.verbs_per_class) throw ConfigError("synthetic task: too many verbs");
  for (std::size_t i = 0; i < 2 * o.verbs_per_class; ++i) lex.verbs[i % 2].push_back(verb_stems[i] + "ed");
  return lex;
}

struct Draw {
  RelationInstance instance;
  bool linked = false;
};

// One sentence. `tail` adds the class continuation used in the corpus.
Draw draw(const Lexicon& lex, std::size_t pool, std::size_t verb_limit, bool tail, Rng& rng, std::string id) {
  const Relation& rel = kRelations[rng.below(kRelations.size())];
  // A third of labeled sentences carry no relation.
  const bool linked = rng.below(3) != 0;
  const auto& subjects = lex.names[pool][rel.subject];
  const auto& objects = lex.names[pool][rel.object];
  const auto& verbs = lex.verbs[linked ? 1 : 0];

  Draw d;
  d.linked = linked;
  RelationInstance& inst = d.instance;
  inst.id = std::move(id);
  const auto& prefix = pick(kPrefixes, rng);
  inst.tokens = prefix;
  inst.arg1 = Argument{inst.tokens.size(), inst.tokens.size(), Role::kSubject, kTypeNames[rel.subject]};
  inst.tokens.push_back(pick(subjects, rng));
  inst.tokens.push_back(verbs[rng.below(verb_limit)]);
  inst.arg2 = Argument{inst.tokens.size(), inst.tokens.size(), Role::kObject, kTypeNames[rel.object]};
  inst.tokens.push_back(pick(objects, rng));
  const auto& rest = tail ? pick(linked ? kLinkedTails : kUnlinkedTails, rng) : pick(kSuffixes, rng);
  inst.tokens.insert(inst.tokens.end(), rest.begin(), rest.end());
  inst.tokens.push_back(".");
  inst.label = linked ? rel.label : std::string(kNoRelation);
  return d;
}

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const std::string& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

Dataset labeled(const Lexicon& lex, std::size_t n, std::size_t pool, std::size_t verb_limit, Rng& rng,
                const std::string& prefix) {
  Dataset ds;
  ds.format = DatasetFormat::kTacred;
  ds.labels = labels();
  for (std::size_t i = 0; i < n; ++i) {
    ds.instances.push_back(draw(lex, pool, verb_limit, false, rng, prefix + std::to_string(i)).instance);
  }
  return ds;
}

}  // namespace

std::vector<std::string> labels() {
  std::vector<std::string> out{std::string(kNoRelation)};
  for (const Relation& r : kRelations) out.emplace_back(r.label);
  std::sort(out.begin(), out.end());
  return out;
}

Task make_task(const Options& options) {
  const Lexicon lex = make_lexicon(options, options.seed);
  Task task;
  Rng corpus_rng = Rng::derive(options.seed, 0xc0a9, 0);
  for (std::size_t i = 0; i < options.pretrain_sentences; ++i) {
    task.pretrain_corpus.push_back(
        join(draw(lex, 0, options.verbs_per_class, true, corpus_rng, "").instance.tokens));
  }
  Rng train_rng = Rng::derive(options.seed, 0xc0a9, 1);
  Rng valid_rng = Rng::derive(options.seed, 0xc0a9, 2);
  Rng unseen_rng = Rng::derive(options.seed, 0xc0a9, 3);
  task.train = labeled(lex, options.train_examples, 0, options.seen_verbs_per_class, train_rng, "train-");
  task.valid = labeled(lex, options.valid_examples, 0, options.verbs_per_class, valid_rng, "valid-");
  task.valid_unseen = labeled(lex, options.valid_examples, 1, options.verbs_per_class, unseen_rng, "unseen-");
  return task;
}

std::vector<std::string> make_memorization_corpus(std::size_t n, std::uint64_t seed) {
  Options o;
  o.names_per_type = 32;
  const Lexicon lex = make_lexicon(o, seed);
  std::vector<std::string> leaders;
  for (const auto& pool : lex.names)
    for (const auto& names : pool) leaders.insert(leaders.end(), names.begin(), names.end());
  if (n > leaders.size()) throw ConfigError("memorization corpus: at most " + std::to_string(leaders.size()) + " sentences");
  Rng rng = Rng::derive(seed, 0x3e3, 0);
  shuffle(leaders, rng);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> words = draw(lex, 0, o.verbs_per_class, true, rng, "").instance.tokens;
    words.insert(words.begin(), leaders[i]);
    out.push_back(join(words));
  }
  return out;
}

Dataset make_toy_relations(std::size_t n, std::uint64_t seed) {
  const Lexicon lex = make_lexicon(Options{}, seed);
  Rng rng = Rng::derive(seed, 0x70f, 0);
  return labeled(lex, n, 0, Options{}.verbs_per_class, rng, "toy-");
}

}  // namespace trelab::data::synthetic
