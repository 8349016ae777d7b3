// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace trelab::testing {

// Minimal well-formedness check: one root element, balanced and properly
// nested tags, quoted attributes. Enough for generated SVG; returns an empty
// string on success, otherwise a description of the first problem.
inline std::string xml_problem(std::string_view doc) {
  std::vector<std::string> stack;
  bool seen_root = false;
  std::size_t i = 0;
  if (doc.substr(0, 5) == "<?xml") {
    i = doc.find("?>");
    if (i == std::string_view::npos) return "unterminated declaration";
    i += 2;
  }
  while (i < doc.size()) {
    if (doc[i] != '<') {
      if (stack.empty() && !std::isspace(static_cast<unsigned char>(doc[i]))) return "text outside the root";
      if (doc[i] == '&') {
        const std::size_t semi = doc.find(';', i);
        if (semi == std::string_view::npos || semi - i > 6) return "bad entity";
      }
      ++i;
      continue;
    }
    const std::size_t close = doc.find('>', i);
    if (close == std::string_view::npos) return "unterminated tag";
    std::string_view tag = doc.substr(i + 1, close - i - 1);
    i = close + 1;
    if (tag.substr(0, 3) == "!--") continue;
    if (!tag.empty() && tag.front() == '/') {
      const std::string name(tag.substr(1));
      if (stack.empty() || stack.back() != name) return "mismatched </" + name + ">";
      stack.pop_back();
      continue;
    }
    const bool self_closing = !tag.empty() && tag.back() == '/';
    if (self_closing) tag.remove_suffix(1);
    const std::size_t name_end = tag.find_first_of(" \t\n");
    const std::string name(tag.substr(0, name_end));
    if (name.empty()) return "empty tag name";
    std::size_t quotes = 0;
    for (char c : tag) quotes += c == '"';
    if (quotes % 2 != 0) return "unbalanced quotes in <" + name + ">";
    if (stack.empty()) {
      if (seen_root) return "second root element <" + name + ">";
      seen_root = true;
    }
    if (!self_closing) stack.push_back(name);
  }
  if (!seen_root) return "no root element";
  if (!stack.empty()) return "unclosed <" + stack.back() + ">";
  return {};
}

}  // namespace trelab::testing
