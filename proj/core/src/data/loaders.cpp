// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "trelab/data/dataset.hpp"
#include "trelab/error.hpp"

namespace trelab::data {
namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read dataset " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

Dataset parse_tacred(std::string_view json_text) {
  nlohmann::json records;
  try {
    records = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("TACRED file is not valid JSON: ") + e.what());
  }
  if (!records.is_array()) throw ParseError("TACRED file must hold an array of records");

  Dataset ds;
  ds.format = DatasetFormat::kTacred;
  std::set<std::string> seen_labels{std::string(kNoRelation)};
  for (std::size_t i = 0; i < records.size(); ++i) {
    const nlohmann::json& r = records[i];
    const std::string where = "TACRED record " + std::to_string(i);
    if (!r.is_object()) throw ParseError(where + ": not an object");
    for (const char* field :
         {"token", "subj_start", "subj_end", "obj_start", "obj_end", "subj_type", "obj_type", "relation"}) {
      if (!r.contains(field)) throw ParseError(where + ": missing field '" + field + "'");
    }
    RelationInstance inst;
    try {
      inst.id = r.contains("id") ? r.at("id").get<std::string>() : std::to_string(i);
      inst.tokens = r.at("token").get<std::vector<std::string>>();
      auto span_at = [&](const char* key) {
        const long long v = r.at(key).get<long long>();
        if (v < 0) throw ValidationError(where + ": negative index in '" + key + "'");
        return static_cast<std::size_t>(v);
      };
      inst.arg1 = Argument{span_at("subj_start"), span_at("subj_end"), Role::kSubject,
                           r.at("subj_type").get<std::string>()};
      inst.arg2 = Argument{span_at("obj_start"), span_at("obj_end"), Role::kObject,
                           r.at("obj_type").get<std::string>()};
      inst.label = r.at("relation").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
    try {
      validate(inst);
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
    seen_labels.insert(inst.label);
    ds.instances.push_back(std::move(inst));
  }

  const auto official = tacred_labels();
  const bool all_official = std::all_of(seen_labels.begin(), seen_labels.end(), [&](const std::string& l) {
    return std::find(official.begin(), official.end(), l) != official.end();
  });
  if (all_official) {
    ds.labels.assign(official.begin(), official.end());
  } else {
    ds.labels.assign(seen_labels.begin(), seen_labels.end());
  }
  return ds;
}

Dataset load_tacred(const std::filesystem::path& path) { return parse_tacred(read_file(path)); }

std::string format_tacred(const Dataset& dataset) {
  nlohmann::ordered_json records = nlohmann::ordered_json::array();
  for (const RelationInstance& inst : dataset.instances) {
    const Argument& s = inst.subject();
    const Argument& o = inst.object();
    if (!s.type || !o.type) throw ValidationError("instance '" + inst.id + "': TACRED records need entity types");
    nlohmann::ordered_json r;
    r["id"] = inst.id;
    r["relation"] = inst.label;
    r["token"] = inst.tokens;
    r["subj_start"] = s.begin;
    r["subj_end"] = s.end;
    r["obj_start"] = o.begin;
    r["obj_end"] = o.end;
    r["subj_type"] = *s.type;
    r["obj_type"] = *o.type;
    records.push_back(std::move(r));
  }
  return records.dump(1) + "\n";
}

namespace {

bool is_punct(char c) {
  static const std::string_view punct = ".,;:!?\"()[]{}";
  return punct.find(c) != std::string_view::npos;
}

// Splits a whitespace-free chunk into leading punctuation, body and trailing punctuation.
void push_chunk(std::string_view chunk, std::vector<std::string>& out) {
  std::size_t b = 0, e = chunk.size();
  while (b < e && is_punct(chunk[b])) out.emplace_back(1, chunk[b++]);
  std::vector<std::string> trailing;
  while (e > b && is_punct(chunk[e - 1])) trailing.emplace_back(1, chunk[--e]);
  if (e > b) out.emplace_back(chunk.substr(b, e - b));
  out.insert(out.end(), trailing.rbegin(), trailing.rend());
}

void push_text(std::string_view text, std::vector<std::string>& out) {
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) push_chunk(text.substr(i, j - i), out);
    i = j;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

// Tokenizes an annotated sentence and fills both argument spans.
void parse_marked_sentence(std::string_view sentence, std::size_t line_no, RelationInstance& inst) {
  const std::string where = "SemEval line " + std::to_string(line_no);
  struct Open {
    bool active = false;
    bool done = false;
    std::size_t start = 0;
  } e1, e2;
  std::size_t i = 0;
  std::size_t text_start = 0;
  auto flush = [&](std::size_t upto) { push_text(sentence.substr(text_start, upto - text_start), inst.tokens); };
  while (i < sentence.size()) {
    if (sentence[i] != '<') {
      ++i;
      continue;
    }
    std::string_view rest = sentence.substr(i);
    Open* target = nullptr;
    bool closing = false;
    std::size_t tag_len = 4;
    if (rest.starts_with("<e1>")) target = &e1;
    else if (rest.starts_with("<e2>")) target = &e2;
    else if (rest.starts_with("</e1>")) target = &e1, closing = true, tag_len = 5;
    else if (rest.starts_with("</e2>")) target = &e2, closing = true, tag_len = 5;
    if (!target) {
      ++i;
      continue;
    }
    flush(i);
    Open& other = target == &e1 ? e2 : e1;
    if (!closing) {
      if (target->active || target->done) throw ParseError(where + ": repeated entity marker");
      if (other.active) throw ParseError(where + ": nested entity markers");
      target->active = true;
      target->start = inst.tokens.size();
    } else {
      if (!target->active) throw ParseError(where + ": closing marker without opening marker");
      if (inst.tokens.size() == target->start) throw ParseError(where + ": empty entity mention");
      target->active = false;
      target->done = true;
      Argument& arg = target == &e1 ? inst.arg1 : inst.arg2;
      arg.begin = target->start;
      arg.end = inst.tokens.size() - 1;
    }
    i += tag_len;
    text_start = i;
  }
  flush(sentence.size());
  if (e1.active || e2.active || !e1.done || !e2.done) throw ParseError(where + ": unbalanced entity markup");
}

}  // namespace

Dataset parse_semeval(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(trim(text.substr(start, nl - start)));
    start = nl + 1;
  }

  Dataset ds;
  ds.format = DatasetFormat::kSemEval;
  const auto labels = semeval_labels();
  ds.labels.assign(labels.begin(), labels.end());

  std::size_t i = 0;
  while (i < lines.size()) {
    if (lines[i].empty()) {
      ++i;
      continue;
    }
    const std::size_t line_no = i + 1;
    const std::string where = "SemEval line " + std::to_string(line_no);

    std::string_view sentence_line = lines[i];
    const std::size_t tab = sentence_line.find_first_of("\t ");
    if (tab == std::string_view::npos) throw ParseError(where + ": expected '<id>\\t\"sentence\"'");
    RelationInstance inst;
    inst.id = std::string(sentence_line.substr(0, tab));
    std::string_view sentence = trim(sentence_line.substr(tab + 1));
    if (sentence.size() >= 2 && sentence.front() == '"' && sentence.back() == '"') {
      sentence = sentence.substr(1, sentence.size() - 2);
    }
    inst.arg1.role = Role::kSubject;
    inst.arg2.role = Role::kObject;
    parse_marked_sentence(sentence, line_no, inst);

    if (i + 1 >= lines.size() || lines[i + 1].empty()) throw ParseError(where + ": missing relation line");
    inst.label = std::string(lines[i + 1]);
    if (std::find(labels.begin(), labels.end(), inst.label) == labels.end()) {
      throw ParseError("SemEval line " + std::to_string(line_no + 1) + ": unknown relation '" + inst.label + "'");
    }
    if (i + 2 >= lines.size() || !lines[i + 2].starts_with("Comment")) {
      throw ParseError("SemEval line " + std::to_string(line_no + 2) + ": expected 'Comment:' line");
    }
    try {
      validate(inst);
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
    ds.instances.push_back(std::move(inst));
    i += 3;
    if (i < lines.size() && !lines[i].empty()) {
      throw ParseError("SemEval line " + std::to_string(i + 1) + ": expected blank line between records");
    }
  }
  return ds;
}

Dataset load_semeval(const std::filesystem::path& path) { return parse_semeval(read_file(path)); }

}  // namespace trelab::data
