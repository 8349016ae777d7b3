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
#include <vector>

#include "trelab/bpe/vocab.hpp"

namespace trelab::data {

enum class Role { kSubject, kObject };

// Inclusive token span of one relation argument.
struct Argument {
  std::size_t begin = 0;
  std::size_t end = 0;
  Role role = Role::kSubject;
  std::optional<std::string> type;

  friend bool operator==(const Argument&, const Argument&) = default;
};

struct RelationInstance {
  std::string id;
  std::vector<std::string> tokens;
  Argument arg1;
  Argument arg2;
  std::string label;

  const Argument& subject() const { return arg1.role == Role::kSubject ? arg1 : arg2; }
  const Argument& object() const { return arg1.role == Role::kSubject ? arg2 : arg1; }

  friend bool operator==(const RelationInstance&, const RelationInstance&) = default;
};

// Spans within bounds and disjoint, roles distinct, non-empty label.
void validate(const RelationInstance& instance);

enum class DatasetFormat { kTacred, kSemEval };

std::string_view to_string(DatasetFormat format);
DatasetFormat parse_format(std::string_view name);

struct Dataset {
  DatasetFormat format = DatasetFormat::kTacred;
  std::vector<RelationInstance> instances;
  // Closed label set, in id order.
  std::vector<std::string> labels;

  std::size_t size() const { return instances.size(); }
  bool empty() const { return instances.empty(); }
  // The negative class: no_relation for TACRED, Other for SemEval.
  std::string_view negative_label() const;
  std::optional<int> label_id(std::string_view label) const;
  std::map<std::string, std::size_t> label_counts() const;
};

inline constexpr std::string_view kNoRelation = "no_relation";
inline constexpr std::string_view kOther = "Other";

// The 42 TACRED relation labels (41 relations plus no_relation), sorted.
std::span<const std::string> tacred_labels();
// The 19 directed SemEval 2010 Task 8 labels, sorted.
std::span<const std::string> semeval_labels();
// Undirected relation type of a SemEval label ("Cause-Effect(e1,e2)" -> "Cause-Effect").
std::string semeval_relation_type(std::string_view label);

// TACRED JSON release format: an array of records with token, subj_start,
// subj_end, obj_start, obj_end (inclusive), subj_type, obj_type and relation.
// Other fields are ignored. The label set is the official 42 when every label
// belongs to it, otherwise every label seen plus no_relation, sorted.
Dataset parse_tacred(std::string_view json_text);
Dataset load_tacred(const std::filesystem::path& path);
// Inverse of parse_tacred for typed instances.
std::string format_tacred(const Dataset& dataset);

// SemEval 2010 Task 8 text format: "<n>\t\"sentence with <e1>..</e1> <e2>..</e2>\"",
// a relation line, a "Comment:" line and a blank line per record.
Dataset parse_semeval(std::string_view text);
Dataset load_semeval(const std::filesystem::path& path);

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format);

// Expected totals of a bundled fixture: {"total": N, "labels": {"label": count, ...}}.
struct Manifest {
  std::size_t total = 0;
  std::map<std::string, std::size_t> labels;
};

Manifest load_manifest(const std::filesystem::path& path);
// Throws ValidationError describing the first disagreement.
void check_manifest(const Dataset& dataset, const Manifest& manifest);

// Per label: max(1, round(ratio·count)) instances chosen by a seeded shuffle,
// returned in original order. Ratio 1 returns the dataset unchanged.
Dataset stratified_subsample(const Dataset& dataset, double ratio, std::uint64_t seed);

}  // namespace trelab::data
