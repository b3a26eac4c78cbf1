#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace grappa {

// End-effector configuration: position in meters, orientation as XYZ Euler
// angles in degrees, gripper as non-negative finger separation in meters.
struct robot_state {
  std::array<double, 3> position{0.0, 0.0, 0.0};
  std::array<double, 3> orientation{0.0, 0.0, 0.0};
  double gripper = 0.0;

  std::array<double, 7> to_array() const;
  static robot_state from_array(const std::array<double, 7>& v);

  bool finite() const;
  // Throws grappa::error when a component is non-finite or gripper < 0.
  void validate() const;

  bool operator==(const robot_state& other) const = default;
};

double distance(const robot_state& a, const robot_state& b);

using score_vector = std::vector<double>;

// Axis-aligned reachable region for end-effector positions.
struct workspace_bounds {
  std::array<double, 2> x{-0.5, 0.5};
  std::array<double, 2> y{-0.5, 0.5};
  std::array<double, 2> z{0.0, 0.5};

  bool contains(const std::array<double, 3>& p) const;
  std::array<double, 3> clamp(const std::array<double, 3>& p) const;
  std::array<double, 3> center() const;
};

// Script-visible episode memory: flat map from identifier-style keys to
// booleans or finite scalars.  Copied by value between steps, never aliased.
using hidden_value = std::variant<bool, double>;
using hidden_state = std::map<std::string, hidden_value>;

bool valid_hidden_key(const std::string& key);

enum class geometry_kind { position, size, orientation };

struct scene_snapshot;  // defined in grounding.hpp

// Immutable view of the scene handed to policies and the guidance runtime.
struct observation {
  std::shared_ptr<const scene_snapshot> snapshot;
  int step = 0;
};

enum class failure_class { none, timeout, perception, behavior };

std::string to_string(failure_class c);
failure_class failure_class_from_string(const std::string& s);

}  // namespace grappa
