#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace grappa {

// Base class for everything thrown by this library.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

class empty_vector_error : public error {
 public:
  empty_vector_error() : error("score vector must not be empty") {}
};

class length_mismatch_error : public error {
 public:
  length_mismatch_error(std::size_t lhs, std::size_t rhs)
      : error("score vectors differ in length: " + std::to_string(lhs) +
              " vs " + std::to_string(rhs)) {}
};

class mismatched_candidates_error : public error {
 public:
  mismatched_candidates_error(std::size_t got, std::size_t expected)
      : error("candidate count " + std::to_string(got) +
              " does not match the policy's proposal set of " +
              std::to_string(expected)) {}
};

// A previously tracked object could not be resolved this step.
class perception_lost_error : public error {
 public:
  explicit perception_lost_error(const std::string& object)
      : error("perception lost for object '" + object + "'"),
        object_(object) {}
  const std::string& object() const noexcept { return object_; }

 private:
  std::string object_;
};

class not_tracked_error : public error {
 public:
  explicit not_tracked_error(const std::string& object)
      : error("object '" + object + "' was never registered with the tracker"),
        object_(object) {}
  const std::string& object() const noexcept { return object_; }

 private:
  std::string object_;
};

class unknown_parent_error : public error {
 public:
  explicit unknown_parent_error(const std::string& parent)
      : error("parent '" + parent + "' is not currently tracked") {}
};

class fixture_error : public error {
 public:
  explicit fixture_error(const std::string& what)
      : error("fixture: " + what) {}
};

class episode_over_error : public error {
 public:
  episode_over_error() : error("episode stepped past its timeout") {}
};

class config_error : public error {
 public:
  explicit config_error(const std::string& what)
      : error("config: " + what) {}
};

}  // namespace grappa
