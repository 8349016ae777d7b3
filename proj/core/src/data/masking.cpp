// SPDX-License-Identifier: Apache-2.0
#include "trelab/data/masking.hpp"

#include <set>

#include "trelab/error.hpp"

namespace trelab::data {

std::string_view to_string(MaskingStrategy strategy) {
  switch (strategy) {
    case MaskingStrategy::kNone: return "none";
    case MaskingStrategy::kUnk: return "unk";
    case MaskingStrategy::kNe: return "ne";
    case MaskingStrategy::kGr: return "gr";
    case MaskingStrategy::kNeGr: return "ne_gr";
  }
  return "none";
}

MaskingStrategy parse_masking(std::string_view name) {
  if (name == "none") return MaskingStrategy::kNone;
  if (name == "unk") return MaskingStrategy::kUnk;
  if (name == "ne") return MaskingStrategy::kNe;
  if (name == "gr") return MaskingStrategy::kGr;
  if (name == "ne_gr") return MaskingStrategy::kNeGr;
  throw ConfigError("unknown masking strategy '" + std::string(name) + "' (expected none|unk|ne|gr|ne_gr)");
}

bool needs_entity_types(MaskingStrategy strategy) {
  return strategy == MaskingStrategy::kNe || strategy == MaskingStrategy::kNeGr;
}

std::string mask_token(MaskingStrategy strategy, Role role, const std::optional<std::string>& type) {
  const std::string role_name = role == Role::kSubject ? "subj" : "obj";
  switch (strategy) {
    case MaskingStrategy::kNone:
      throw ContractError("the NONE strategy has no mask token");
    case MaskingStrategy::kUnk:
      return "<mask>";
    case MaskingStrategy::kGr:
      return "<" + role_name + ">";
    case MaskingStrategy::kNe:
    case MaskingStrategy::kNeGr:
      if (!type || type->empty()) {
        throw StrategyError("masking strategy '" + std::string(to_string(strategy)) +
                            "' needs typed entities; this data has untyped arguments");
      }
      return strategy == MaskingStrategy::kNe ? "<ne-" + *type + ">" : "<" + role_name + "-" + *type + ">";
  }
  return "<mask>";
}

bool is_mask_token(std::string_view word) {
  return word.size() > 2 && word.front() == '<' && word.back() == '>' &&
         (word == "<mask>" || word == "<subj>" || word == "<obj>" || word.starts_with("<ne-") ||
          word.starts_with("<subj-") || word.starts_with("<obj-"));
}

RelationInstance apply_masking(const RelationInstance& instance, MaskingStrategy strategy) {
  if (strategy == MaskingStrategy::kNone) return instance;
  validate(instance);

  const bool first_is_arg1 = instance.arg1.begin < instance.arg2.begin;
  const Argument& first = first_is_arg1 ? instance.arg1 : instance.arg2;
  const Argument& second = first_is_arg1 ? instance.arg2 : instance.arg1;
  const std::string first_mask = mask_token(strategy, first.role, first.type);
  const std::string second_mask = mask_token(strategy, second.role, second.type);

  RelationInstance out = instance;
  out.tokens.clear();
  const auto& t = instance.tokens;
  out.tokens.insert(out.tokens.end(), t.begin(), t.begin() + static_cast<std::ptrdiff_t>(first.begin));
  const std::size_t first_at = out.tokens.size();
  out.tokens.push_back(first_mask);
  out.tokens.insert(out.tokens.end(), t.begin() + static_cast<std::ptrdiff_t>(first.end + 1),
                    t.begin() + static_cast<std::ptrdiff_t>(second.begin));
  const std::size_t second_at = out.tokens.size();
  out.tokens.push_back(second_mask);
  out.tokens.insert(out.tokens.end(), t.begin() + static_cast<std::ptrdiff_t>(second.end + 1), t.end());

  Argument& new_first = first_is_arg1 ? out.arg1 : out.arg2;
  Argument& new_second = first_is_arg1 ? out.arg2 : out.arg1;
  new_first.begin = new_first.end = first_at;
  new_second.begin = new_second.end = second_at;
  return out;
}

std::vector<std::string> mask_vocabulary(const Dataset& dataset, MaskingStrategy strategy) {
  std::set<std::string> tokens;
  if (strategy == MaskingStrategy::kNone) return {};
  for (const RelationInstance& inst : dataset.instances) {
    for (const Argument* a : {&inst.arg1, &inst.arg2}) tokens.insert(mask_token(strategy, a->role, a->type));
  }
  return {tokens.begin(), tokens.end()};
}

}  // namespace trelab::data
