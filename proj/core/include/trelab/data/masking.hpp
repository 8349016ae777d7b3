// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trelab/data/dataset.hpp"

namespace trelab::data {

enum class MaskingStrategy { kNone, kUnk, kNe, kGr, kNeGr };

std::string_view to_string(MaskingStrategy strategy);
// Accepts none|unk|ne|gr|ne_gr.
MaskingStrategy parse_masking(std::string_view name);
bool needs_entity_types(MaskingStrategy strategy);

// Reserved token replacing one argument mention:
//   UNK   <mask>
//   NE    <ne-TYPE>
//   GR    <subj> / <obj>
//   NE_GR <subj-TYPE> / <obj-TYPE>
std::string mask_token(MaskingStrategy strategy, Role role, const std::optional<std::string>& type);
bool is_mask_token(std::string_view word);

// Replaces each argument span by exactly one mask token and updates the spans.
// NONE is the identity. Throws StrategyError when the strategy needs entity
// types the instance does not carry.
RelationInstance apply_masking(const RelationInstance& instance, MaskingStrategy strategy);

// Every mask token the strategy can produce on `dataset`, sorted.
std::vector<std::string> mask_vocabulary(const Dataset& dataset, MaskingStrategy strategy);

}  // namespace trelab::data
