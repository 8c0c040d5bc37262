#pragma once

// Small XML well-formedness check for generated SVG: balanced tags, a
// single root, quoted attributes and valid entity references.

#include <map>
#include <regex>
#include <string>
#include <vector>

namespace xml_check {

struct Result {
  bool ok = false;
  std::string message;
  std::string root;
  std::map<std::string, int> elements;
  int count(const std::string& name) const {
    auto it = elements.find(name);
    return it == elements.end() ? 0 : it->second;
  }
};

inline bool entities_ok(const std::string& text) {
  static const std::regex entity("&(amp|lt|gt|quot|apos|#[0-9]+|#x[0-9a-fA-F]+);");
  for (size_t i = text.find('&'); i != std::string::npos; i = text.find('&', i + 1)) {
    std::smatch m;
    const std::string rest = text.substr(i, 12);
    if (!std::regex_search(rest, m, entity) || m.position(0) != 0) return false;
  }
  return true;
}

inline Result well_formed(const std::string& doc) {
  static const std::regex attr_re(R"(\s+[A-Za-z_:][-A-Za-z0-9_:.]*\s*=\s*("[^"<]*"|'[^'<]*'))");
  static const std::regex name_re(R"([A-Za-z_:][-A-Za-z0-9_:.]*)");
  Result r;
  std::vector<std::string> stack;
  size_t i = 0;
  bool closed_root = false;
  auto fail = [&](const std::string& why) {
    r.ok = false;
    r.message = why + " at offset " + std::to_string(i);
    return r;
  };
  while (i < doc.size()) {
    const size_t lt = doc.find('<', i);
    const std::string text = doc.substr(i, lt == std::string::npos ? std::string::npos : lt - i);
    if (text.find('>') != std::string::npos || !entities_ok(text)) return fail("bad character data");
    if (stack.empty() && text.find_first_not_of(" \t\r\n") != std::string::npos) return fail("text outside root");
    if (lt == std::string::npos) break;
    i = lt;
    if (doc.compare(i, 5, "<?xml") == 0) {
      if (i != 0) return fail("misplaced declaration");
      const size_t end = doc.find("?>", i);
      if (end == std::string::npos) return fail("unterminated declaration");
      i = end + 2;
      continue;
    }
    if (doc.compare(i, 4, "<!--") == 0) {
      const size_t end = doc.find("-->", i);
      if (end == std::string::npos) return fail("unterminated comment");
      i = end + 3;
      continue;
    }
    const size_t gt = doc.find('>', i);
    if (gt == std::string::npos) return fail("unterminated tag");
    std::string tag = doc.substr(i + 1, gt - i - 1);
    if (!tag.empty() && tag[0] == '/') {
      const std::string name = tag.substr(1);
      if (stack.empty() || stack.back() != name) return fail("mismatched </" + name + ">");
      stack.pop_back();
      if (stack.empty()) closed_root = true;
    } else {
      const bool self_closing = !tag.empty() && tag.back() == '/';
      if (self_closing) tag.pop_back();
      std::smatch m;
      if (!std::regex_search(tag, m, name_re) || m.position(0) != 0) return fail("bad tag name");
      const std::string name = m.str(0);
      std::string rest = tag.substr(name.size());
      std::map<std::string, int> seen;
      for (std::smatch a; std::regex_search(rest, a, attr_re) && a.position(0) == 0; rest = a.suffix()) {
        if (!entities_ok(a.str(1))) return fail("bad entity in attribute");
        const std::string key = a.str(0).substr(0, a.str(0).find('='));
        if (seen[key.substr(key.find_first_not_of(" \t\r\n"))]++) return fail("duplicate attribute");
      }
      if (rest.find_first_not_of(" \t\r\n") != std::string::npos) return fail("bad attributes in <" + name + ">");
      if (stack.empty()) {
        if (closed_root || !r.root.empty()) return fail("second root element");
        r.root = name;
      }
      ++r.elements[name];
      if (!self_closing) stack.push_back(name);
      else if (stack.empty()) closed_root = true;
    }
    i = gt + 1;
  }
  if (!stack.empty()) return fail("unclosed <" + stack.back() + ">");
  if (r.root.empty()) return fail("no root element");
  r.ok = true;
  return r;
}

}  // namespace xml_check
