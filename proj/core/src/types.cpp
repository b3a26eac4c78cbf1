#include "grappa/types.hpp"

#include <cctype>
#include <cmath>

#include "grappa/errors.hpp"

namespace grappa {

std::array<double, 7> robot_state::to_array() const {
  return {position[0],    position[1],    position[2],   orientation[0],
          orientation[1], orientation[2], gripper};
}

robot_state robot_state::from_array(const std::array<double, 7>& v) {
  robot_state s;
  s.position = {v[0], v[1], v[2]};
  s.orientation = {v[3], v[4], v[5]};
  s.gripper = v[6];
  return s;
}

bool robot_state::finite() const {
  for (double v : to_array()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void robot_state::validate() const {
  if (!finite()) throw error("robot state has a non-finite component");
  if (gripper < 0.0) throw error("gripper separation must be >= 0");
}

double distance(const robot_state& a, const robot_state& b) {
  double sum = 0.0;
  auto va = a.to_array();
  auto vb = b.to_array();
  for (std::size_t i = 0; i < va.size(); ++i) {
    double d = va[i] - vb[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

bool workspace_bounds::contains(const std::array<double, 3>& p) const {
  return p[0] >= x[0] && p[0] <= x[1] && p[1] >= y[0] && p[1] <= y[1] &&
         p[2] >= z[0] && p[2] <= z[1];
}

std::array<double, 3> workspace_bounds::clamp(
    const std::array<double, 3>& p) const {
  auto clip = [](double v, double lo, double hi) {
    return v < lo ? lo : (v > hi ? hi : v);
  };
  return {clip(p[0], x[0], x[1]), clip(p[1], y[0], y[1]),
          clip(p[2], z[0], z[1])};
}

std::array<double, 3> workspace_bounds::center() const {
  return {(x[0] + x[1]) / 2.0, (y[0] + y[1]) / 2.0, (z[0] + z[1]) / 2.0};
}

bool valid_hidden_key(const std::string& key) {
  if (key.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(key[0])) || key[0] == '_')) {
    return false;
  }
  for (char c : key) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) {
      return false;
    }
  }
  return true;
}

std::string to_string(failure_class c) {
  switch (c) {
    case failure_class::none: return "none";
    case failure_class::timeout: return "timeout";
    case failure_class::perception: return "perception";
    case failure_class::behavior: return "behavior";
  }
  return "none";
}

failure_class failure_class_from_string(const std::string& s) {
  if (s == "none") return failure_class::none;
  if (s == "timeout") return failure_class::timeout;
  if (s == "perception") return failure_class::perception;
  if (s == "behavior") return failure_class::behavior;
  throw error("unknown failure class '" + s + "'");
}

}  // namespace grappa
