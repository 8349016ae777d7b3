// SPDX-License-Identifier: Apache-2.0
#include "trelab/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "trelab/error.hpp"
#include "trelab/numerics/rng.hpp"

namespace trelab::data {

void validate(const RelationInstance& inst) {
  const std::string where = inst.id.empty() ? std::string("instance") : "instance '" + inst.id + "'";
  if (inst.tokens.empty()) throw ValidationError(where + ": no tokens");
  for (const Argument* a : {&inst.arg1, &inst.arg2}) {
    if (a->end < a->begin) {
      throw ValidationError(where + ": span end " + std::to_string(a->end) + " precedes start " +
                            std::to_string(a->begin));
    }
    if (a->end >= inst.tokens.size()) {
      throw ValidationError(where + ": span [" + std::to_string(a->begin) + ", " + std::to_string(a->end) +
                            "] outside " + std::to_string(inst.tokens.size()) + " tokens");
    }
  }
  if (inst.arg1.begin <= inst.arg2.end && inst.arg2.begin <= inst.arg1.end) {
    throw ValidationError(where + ": argument spans overlap");
  }
  if (inst.arg1.role == inst.arg2.role) throw ValidationError(where + ": both arguments have the same role");
  if (inst.label.empty()) throw ValidationError(where + ": empty label");
}

std::string_view to_string(DatasetFormat format) {
  return format == DatasetFormat::kTacred ? "tacred" : "semeval";
}

DatasetFormat parse_format(std::string_view name) {
  if (name == "tacred") return DatasetFormat::kTacred;
  if (name == "semeval") return DatasetFormat::kSemEval;
  throw ConfigError("unknown dataset format '" + std::string(name) + "' (expected tacred|semeval)");
}

std::string_view Dataset::negative_label() const {
  return format == DatasetFormat::kTacred ? kNoRelation : kOther;
}

std::optional<int> Dataset::label_id(std::string_view label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) return std::nullopt;
  return static_cast<int>(it - labels.begin());
}

std::map<std::string, std::size_t> Dataset::label_counts() const {
  std::map<std::string, std::size_t> counts;
  for (const RelationInstance& inst : instances) ++counts[inst.label];
  return counts;
}

std::span<const std::string> tacred_labels() {
  static const std::vector<std::string> labels = [] {
    std::vector<std::string> v = {
        "no_relation",
        "org:alternate_names",
        "org:city_of_headquarters",
        "org:country_of_headquarters",
        "org:dissolved",
        "org:founded",
        "org:founded_by",
        "org:member_of",
        "org:members",
        "org:number_of_employees/members",
        "org:parents",
        "org:political/religious_affiliation",
        "org:shareholders",
        "org:stateorprovince_of_headquarters",
        "org:subsidiaries",
        "org:top_members/employees",
        "org:website",
        "per:age",
        "per:alternate_names",
        "per:cause_of_death",
        "per:charges",
        "per:children",
        "per:cities_of_residence",
        "per:city_of_birth",
        "per:city_of_death",
        "per:countries_of_residence",
        "per:country_of_birth",
        "per:country_of_death",
        "per:date_of_birth",
        "per:date_of_death",
        "per:employee_of",
        "per:origin",
        "per:other_family",
        "per:parents",
        "per:religion",
        "per:schools_attended",
        "per:siblings",
        "per:spouse",
        "per:stateorprovince_of_birth",
        "per:stateorprovince_of_death",
        "per:stateorprovinces_of_residence",
        "per:title",
    };
    std::sort(v.begin(), v.end());
    return v;
  }();
  return labels;
}

std::span<const std::string> semeval_labels() {
  static const std::vector<std::string> labels = [] {
    const char* types[] = {"Cause-Effect",       "Component-Whole",   "Content-Container",
                           "Entity-Destination", "Entity-Origin",     "Instrument-Agency",
                           "Member-Collection",  "Message-Topic",     "Product-Producer"};
    std::vector<std::string> v{std::string(kOther)};
    for (const char* t : types) {
      v.push_back(std::string(t) + "(e1,e2)");
      v.push_back(std::string(t) + "(e2,e1)");
    }
    std::sort(v.begin(), v.end());
    return v;
  }();
  return labels;
}

std::string semeval_relation_type(std::string_view label) {
  const std::size_t paren = label.find('(');
  return std::string(label.substr(0, paren));
}

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  return format == DatasetFormat::kTacred ? load_tacred(path) : load_semeval(path);
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read manifest " + path.string());
  Manifest m;
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    m.total = j.at("total").get<std::size_t>();
    for (auto it = j.at("labels").begin(); it != j.at("labels").end(); ++it) {
      m.labels[it.key()] = it.value().get<std::size_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("manifest " + path.string() + ": " + e.what());
  }
  return m;
}

void check_manifest(const Dataset& dataset, const Manifest& manifest) {
  if (dataset.size() != manifest.total) {
    throw ValidationError("dataset has " + std::to_string(dataset.size()) + " instances, manifest expects " +
                          std::to_string(manifest.total));
  }
  const auto counts = dataset.label_counts();
  if (counts != manifest.labels) {
    for (const auto& [label, n] : manifest.labels) {
      auto it = counts.find(label);
      const std::size_t got = it == counts.end() ? 0 : it->second;
      if (got != n) {
        throw ValidationError("label '" + label + "': " + std::to_string(got) + " instances, manifest expects " +
                              std::to_string(n));
      }
    }
    throw ValidationError("dataset contains labels missing from the manifest");
  }
}

Dataset stratified_subsample(const Dataset& dataset, double ratio, std::uint64_t seed) {
  if (dataset.empty()) throw InputError("cannot subsample an empty dataset");
  if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("sampling ratio must lie in (0, 1]");
  if (ratio == 1.0) return dataset;

  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < dataset.size(); ++i) by_label[dataset.instances[i].label].push_back(i);

  std::vector<std::size_t> chosen;
  std::uint64_t stream = 0;
  for (auto& [label, indices] : by_label) {
    const auto n = static_cast<double>(indices.size());
    const auto k = std::min(indices.size(), std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(ratio * n))));
    numerics::Rng rng = numerics::Rng::derive(seed, 0x5ab5a3b1e, stream++);
    // Partial Fisher-Yates: the first k slots become a uniform sample.
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(indices.size() - i));
      std::swap(indices[i], indices[j]);
    }
    chosen.insert(chosen.end(), indices.begin(), indices.begin() + static_cast<std::ptrdiff_t>(k));
  }
  std::sort(chosen.begin(), chosen.end());

  Dataset out;
  out.format = dataset.format;
  out.labels = dataset.labels;
  out.instances.reserve(chosen.size());
  for (std::size_t i : chosen) out.instances.push_back(dataset.instances[i]);
  return out;
}

}  // namespace trelab::data
