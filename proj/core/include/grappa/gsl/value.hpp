#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace grappa::gsl {

struct value;

// Map with deterministic (sorted) key order and value semantics.
struct value_map {
  std::vector<std::pair<std::string, value>> entries;  // sorted by key

  const value* find(const std::string& key) const;
  value* find(const std::string& key);
  void set(const std::string& key, value v);
  std::size_t size() const { return entries.size(); }
};

struct value {
  std::variant<double, bool, std::string, std::vector<double>, value_map> v;

  value() : v(0.0) {}
  value(double d) : v(d) {}
  value(bool b) : v(b) {}
  value(std::string s) : v(std::move(s)) {}
  value(std::vector<double> vec) : v(std::move(vec)) {}
  value(value_map m) : v(std::move(m)) {}

  bool is_number() const { return std::holds_alternative<double>(v); }
  bool is_bool() const { return std::holds_alternative<bool>(v); }
  bool is_string() const { return std::holds_alternative<std::string>(v); }
  bool is_vector() const { return std::holds_alternative<std::vector<double>>(v); }
  bool is_map() const { return std::holds_alternative<value_map>(v); }

  double as_number() const { return std::get<double>(v); }
  bool as_bool() const { return std::get<bool>(v); }
  const std::string& as_string() const { return std::get<std::string>(v); }
  const std::vector<double>& as_vector() const {
    return std::get<std::vector<double>>(v);
  }
  const value_map& as_map() const { return std::get<value_map>(v); }

  const char* type_name() const;
};

}  // namespace grappa::gsl
