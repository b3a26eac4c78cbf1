#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace grappa {

// Minimal TOML-style config: `[section]` headers, `key = value` lines, `#`
// comments.  Values are quoted strings, numbers, booleans, or flat arrays.
class config_file {
 public:
  using value = std::variant<std::string, double, bool,
                             std::vector<std::string>, std::vector<double>>;

  static config_file parse_file(const std::string& path);
  static config_file parse_text(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback = "") const;
  double get_number(const std::string& section, const std::string& key,
                    double fallback) const;
  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const;
  std::vector<std::string> get_string_list(const std::string& section,
                                           const std::string& key) const;
  std::vector<double> get_number_list(const std::string& section,
                                      const std::string& key) const;

  const std::map<std::string, std::map<std::string, value>>& sections() const {
    return sections_;
  }

 private:
  const value* find(const std::string& section, const std::string& key) const;
  std::map<std::string, std::map<std::string, value>> sections_;
};

// Seed specs: "12" (single), "0..49" (inclusive range), "1,5,9" (list).
std::vector<std::uint64_t> parse_seed_spec(const std::string& spec);

}  // namespace grappa
