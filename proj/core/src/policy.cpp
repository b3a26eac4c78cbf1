#include "grappa/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "grappa/errors.hpp"
#include "grappa/grounding.hpp"
#include "grappa/rng.hpp"

namespace grappa {

namespace {

double clamp_nonnegative(double v) { return v < 0.0 ? 0.0 : v; }

std::uint64_t hash_state_bits(const robot_state& s) {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (double v : s.to_array()) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    h = mix64(h ^ bits);
  }
  return h;
}

}  // namespace

std::vector<robot_state> random_policy::sample_actions(const observation&,
                                                       const robot_state&,
                                                       int n,
                                                       std::uint64_t seed) const {
  if (n < 1) throw error("sample count must be >= 1");
  rng r(seed);
  std::vector<robot_state> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    robot_state s;
    s.position = {r.uniform(bounds_.x[0], bounds_.x[1]),
                  r.uniform(bounds_.y[0], bounds_.y[1]),
                  r.uniform(bounds_.z[0], bounds_.z[1])};
    s.orientation = {r.uniform(-180.0, 180.0), r.uniform(-180.0, 180.0),
                     r.uniform(-180.0, 180.0)};
    s.gripper = r.uniform(0.0, max_gripper_);
    out.push_back(s);
  }
  return out;
}

score_vector random_policy::action_probabilities(
    const observation&, const robot_state&,
    const std::vector<robot_state>& candidates) const {
  if (candidates.empty()) throw empty_vector_error();
  return score_vector(candidates.size(), 1.0);
}

gaussian_regression_policy::gaussian_regression_policy(predictor_fn predictor,
                                                       params p)
    : predictor_(std::move(predictor)), params_(p) {
  if (!predictor_) throw error("gaussian policy needs a predictor");
  if (!(params_.sigma_pos > 0.0) || !(params_.sigma_rot > 0.0) ||
      !(params_.sigma_grip > 0.0)) {
    throw error("gaussian policy sigmas must be > 0");
  }
}

robot_state gaussian_regression_policy::predict(const observation& obs,
                                                const robot_state& state) const {
  return predictor_(obs, state);
}

std::vector<robot_state> gaussian_regression_policy::sample_actions(
    const observation& obs, const robot_state& state, int n,
    std::uint64_t seed) const {
  if (n < 1) throw error("sample count must be >= 1");
  robot_state mean = predictor_(obs, state);
  rng r(seed);
  std::vector<robot_state> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    robot_state s = mean;
    for (auto& p : s.position) p += params_.sigma_pos * r.normal();
    for (auto& o : s.orientation) o += params_.sigma_rot * r.normal();
    s.gripper = clamp_nonnegative(mean.gripper + params_.sigma_grip * r.normal());
    out.push_back(s);
  }
  return out;
}

score_vector gaussian_regression_policy::action_probabilities(
    const observation& obs, const robot_state& state,
    const std::vector<robot_state>& candidates) const {
  if (candidates.empty()) throw empty_vector_error();
  robot_state mean = predictor_(obs, state);
  score_vector scores;
  scores.reserve(candidates.size());
  for (const auto& c : candidates) {
    double q = 0.0;
    for (int i = 0; i < 3; ++i) {
      double d = (c.position[i] - mean.position[i]) / params_.sigma_pos;
      q += d * d;
    }
    for (int i = 0; i < 3; ++i) {
      double d = (c.orientation[i] - mean.orientation[i]) / params_.sigma_rot;
      q += d * d;
    }
    double dg = (c.gripper - mean.gripper) / params_.sigma_grip;
    q += dg * dg;
    scores.push_back(std::exp(-0.5 * q));
  }
  return scores;
}

sampled_waypoint_policy::sampled_waypoint_policy(
    std::vector<std::array<double, 3>> proposals, score_vector weights,
    std::array<double, 3> orientation, double gripper)
    : proposals_(std::move(proposals)),
      weights_(std::move(weights)),
      orientation_(orientation),
      gripper_(gripper) {
  if (proposals_.empty()) throw error("waypoint policy needs proposals");
  if (weights_.size() != proposals_.size()) {
    throw length_mismatch_error(weights_.size(), proposals_.size());
  }
  for (double w : weights_) {
    if (!(w >= 0.0)) throw error("waypoint weights must be non-negative");
  }
}

std::vector<robot_state> sampled_waypoint_policy::sample_actions(
    const observation&, const robot_state&, int n, std::uint64_t) const {
  if (static_cast<std::size_t>(n) != proposals_.size()) {
    throw mismatched_candidates_error(static_cast<std::size_t>(n),
                                      proposals_.size());
  }
  std::vector<robot_state> out;
  out.reserve(proposals_.size());
  for (const auto& p : proposals_) {
    robot_state s;
    s.position = p;
    s.orientation = orientation_;
    s.gripper = gripper_;
    out.push_back(s);
  }
  return out;
}

score_vector sampled_waypoint_policy::action_probabilities(
    const observation&, const robot_state&,
    const std::vector<robot_state>& candidates) const {
  if (candidates.size() != proposals_.size()) {
    throw mismatched_candidates_error(candidates.size(), proposals_.size());
  }
  return weights_;
}

robot_state dynamics_model::forecast(const robot_state& current,
                                     const robot_state& action) const {
  if (mode_ == dynamics_mode::identity) return action;

  robot_state out = action;
  double dx = action.position[0] - current.position[0];
  double dy = action.position[1] - current.position[1];
  double dz = action.position[2] - current.position[2];
  double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
  if (dist > max_step_) {
    double scale = max_step_ / dist;
    out.position = {current.position[0] + dx * scale,
                    current.position[1] + dy * scale,
                    current.position[2] + dz * scale};
  }
  if (bounds_.has_value()) out.position = bounds_->clamp(out.position);
  return out;
}

std::vector<robot_state> dynamics_model::forecast_all(
    const robot_state& current, const std::vector<robot_state>& candidates) const {
  std::vector<robot_state> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) out.push_back(forecast(current, c));
  return out;
}

predictor_fn make_scripted_expert(expert_config cfg) {
  return [cfg](const observation& obs, const robot_state& state) -> robot_state {
    robot_state target = state;
    const scene_snapshot* scene = obs.snapshot.get();
    if (scene == nullptr) return target;

    auto top_center = [](const scene_object& obj) {
      return std::array<double, 3>{obj.pose[0], obj.pose[1],
                                   obj.pose[2] + obj.size[0] / 2.0};
    };

    if (!cfg.press_order.empty()) {
      const scene_object* next = nullptr;
      for (const auto& name : cfg.press_order) {
        auto it = scene->pressed.find(name);
        bool pressed = it != scene->pressed.end() && it->second;
        if (!pressed) {
          next = scene->find_name(name);
          break;
        }
      }
      if (next != nullptr) {
        auto top = top_center(*next);
        double ex = state.position[0] - top[0];
        double ey = state.position[1] - top[1];
        bool aligned = std::sqrt(ex * ex + ey * ey) <= cfg.align_radius &&
                       state.position[2] > top[2];
        if (aligned) {
          target.position = top;
        } else {
          target.position = {top[0], top[1], top[2] + cfg.hover_height};
        }
        target.orientation = {0.0, 0.0, 0.0};
      }
    } else if (!cfg.target_object.empty()) {
      const scene_object* obj = scene->find_name(cfg.target_object);
      if (obj != nullptr) target.position = obj->pose;
    } else if (!cfg.block_object.empty()) {
      const scene_object* block = scene->find_name(cfg.block_object);
      const scene_object* zone = scene->find_name(cfg.zone_object);
      if (block != nullptr && zone != nullptr) {
        double dx = zone->pose[0] - block->pose[0];
        double dy = zone->pose[1] - block->pose[1];
        double dist = std::sqrt(dx * dx + dy * dy);
        if (dist > 1e-9) {
          // stand slightly behind the block, push through toward the zone
          double ux = dx / dist;
          double uy = dy / dist;
          double bx = block->pose[0] - ux * 0.05;
          double by = block->pose[1] - uy * 0.05;
          double ex = state.position[0] - bx;
          double ey = state.position[1] - by;
          if (std::sqrt(ex * ex + ey * ey) > 0.02) {
            target.position = {bx, by, block->pose[2]};
          } else {
            target.position = {zone->pose[0], zone->pose[1], block->pose[2]};
          }
        }
      }
    }

    for (int i = 0; i < 3; ++i) target.position[i] += cfg.bias[i];
    if (cfg.noise > 0.0) {
      rng jitter(hash_state_bits(state));
      for (int i = 0; i < 3; ++i) {
        target.position[i] += cfg.noise * jitter.normal();
      }
    }
    return target;
  };
}

}  // namespace grappa
