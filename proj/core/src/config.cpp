#include "grappa/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "grappa/errors.hpp"

namespace grappa {
namespace {

std::string trim(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

// Removes an unquoted trailing comment.
std::string strip_comment(const std::string& s) {
  bool in_string = false;
  char quote = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (in_string) {
      if (c == quote) in_string = false;
    } else if (c == '"' || c == '\'') {
      in_string = true;
      quote = c;
    } else if (c == '#') {
      return s.substr(0, i);
    }
  }
  return s;
}

bool parse_number(const std::string& text, double& out) {
  if (text.empty()) return false;
  char* end = nullptr;
  out = std::strtod(text.c_str(), &end);
  return end == text.c_str() + text.size();
}

config_file::value parse_scalar(const std::string& text, int line_no) {
  if (text.size() >= 2 &&
      ((text.front() == '"' && text.back() == '"') ||
       (text.front() == '\'' && text.back() == '\''))) {
    return text.substr(1, text.size() - 2);
  }
  if (text == "true") return true;
  if (text == "false") return false;
  double num = 0.0;
  if (parse_number(text, num)) return num;
  throw config_error("line " + std::to_string(line_no) + ": cannot parse value: " + text);
}

config_file::value parse_value(const std::string& text, int line_no) {
  if (!text.empty() && text.front() == '[') {
    if (text.back() != ']') {
      throw config_error("line " + std::to_string(line_no) + ": unterminated array");
    }
    std::string inner = trim(text.substr(1, text.size() - 2));
    std::vector<std::string> strings;
    std::vector<double> numbers;
    bool any_string = false;
    bool any_number = false;
    if (!inner.empty()) {
      std::istringstream items(inner);
      std::string item;
      while (std::getline(items, item, ',')) {
        config_file::value v = parse_scalar(trim(item), line_no);
        if (const auto* s = std::get_if<std::string>(&v)) {
          strings.push_back(*s);
          any_string = true;
        } else if (const auto* d = std::get_if<double>(&v)) {
          numbers.push_back(*d);
          any_number = true;
        } else {
          throw config_error("line " + std::to_string(line_no) +
                             ": arrays hold strings or numbers");
        }
      }
    }
    if (any_string && any_number) {
      throw config_error("line " + std::to_string(line_no) + ": mixed array types");
    }
    if (any_string) return strings;
    return numbers;
  }
  return parse_scalar(text, line_no);
}

}  // namespace

config_file config_file::parse_text(const std::string& text) {
  config_file cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(strip_comment(line));
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw config_error("line " + std::to_string(line_no) + ": bad section header");
      }
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty()) {
        throw config_error("line " + std::to_string(line_no) + ": empty section name");
      }
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw config_error("line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(t.substr(0, eq));
    std::string val = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw config_error("line " + std::to_string(line_no) + ": empty key");
    }
    cfg.sections_[section][key] = parse_value(val, line_no);
  }
  return cfg;
}

config_file config_file::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str());
}

const config_file::value* config_file::find(const std::string& section,
                                            const std::string& key) const {
  auto sec = sections_.find(section);
  if (sec == sections_.end()) return nullptr;
  auto it = sec->second.find(key);
  if (it == sec->second.end()) return nullptr;
  return &it->second;
}

bool config_file::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

std::string config_file::get_string(const std::string& section, const std::string& key,
                                    const std::string& fallback) const {
  const value* v = find(section, key);
  if (!v) return fallback;
  if (const auto* s = std::get_if<std::string>(v)) return *s;
  throw config_error(section + "." + key + " must be a string");
}

double config_file::get_number(const std::string& section, const std::string& key,
                               double fallback) const {
  const value* v = find(section, key);
  if (!v) return fallback;
  if (const auto* d = std::get_if<double>(v)) return *d;
  throw config_error(section + "." + key + " must be a number");
}

bool config_file::get_bool(const std::string& section, const std::string& key,
                           bool fallback) const {
  const value* v = find(section, key);
  if (!v) return fallback;
  if (const auto* b = std::get_if<bool>(v)) return *b;
  throw config_error(section + "." + key + " must be a boolean");
}

std::vector<std::string> config_file::get_string_list(const std::string& section,
                                                      const std::string& key) const {
  const value* v = find(section, key);
  if (!v) return {};
  if (const auto* l = std::get_if<std::vector<std::string>>(v)) return *l;
  if (const auto* s = std::get_if<std::string>(v)) return {*s};
  throw config_error(section + "." + key + " must be a string array");
}

std::vector<double> config_file::get_number_list(const std::string& section,
                                                 const std::string& key) const {
  const value* v = find(section, key);
  if (!v) return {};
  if (const auto* l = std::get_if<std::vector<double>>(v)) return *l;
  if (const auto* d = std::get_if<double>(v)) return {*d};
  throw config_error(section + "." + key + " must be a number array");
}

std::vector<std::uint64_t> parse_seed_spec(const std::string& spec) {
  std::string t = spec;
  t.erase(std::remove_if(t.begin(), t.end(),
                         [](unsigned char c) { return std::isspace(c); }),
          t.end());
  if (t.empty()) throw config_error("empty seed spec");

  auto parse_one = [](const std::string& s) -> std::uint64_t {
    if (s.empty()) throw config_error("empty seed value");
    for (char c : s) {
      if (!std::isdigit(static_cast<unsigned char>(c))) {
        throw config_error("seeds must be non-negative integers: " + s);
      }
    }
    return std::strtoull(s.c_str(), nullptr, 10);
  };

  std::vector<std::uint64_t> seeds;
  std::istringstream parts(t);
  std::string part;
  while (std::getline(parts, part, ',')) {
    auto dots = part.find("..");
    if (dots != std::string::npos) {
      std::uint64_t lo = parse_one(part.substr(0, dots));
      std::uint64_t hi = parse_one(part.substr(dots + 2));
      if (hi < lo) throw config_error("seed range must not be descending: " + part);
      if (hi - lo > 1000000) throw config_error("seed range too large: " + part);
      for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    } else {
      seeds.push_back(parse_one(part));
    }
  }
  if (seeds.empty()) throw config_error("seed spec produced no seeds");
  return seeds;
}

}  // namespace grappa
