#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "grappa/types.hpp"

namespace grappa {

// A base policy proposes candidate actions and scores how much it likes each
// one.  Implementations are immutable after construction and deterministic:
// the same (observation, state, n, seed) always yields the same candidates,
// and action_probabilities has no side effects.
class policy_interface {
 public:
  virtual ~policy_interface() = default;

  virtual std::vector<robot_state> sample_actions(const observation& obs,
                                                  const robot_state& state,
                                                  int n,
                                                  std::uint64_t seed) const = 0;

  // Unnormalized, non-negative scores aligned with `candidates`.
  virtual score_vector action_probabilities(
      const observation& obs, const robot_state& state,
      const std::vector<robot_state>& candidates) const = 0;

  virtual std::string name() const = 0;
};

// Uniform candidates inside the workspace; every candidate equally likely.
class random_policy : public policy_interface {
 public:
  explicit random_policy(workspace_bounds bounds, double max_gripper = 0.08)
      : bounds_(bounds), max_gripper_(max_gripper) {}

  std::vector<robot_state> sample_actions(const observation& obs,
                                          const robot_state& state, int n,
                                          std::uint64_t seed) const override;
  score_vector action_probabilities(
      const observation& obs, const robot_state& state,
      const std::vector<robot_state>& candidates) const override;
  std::string name() const override { return "random"; }

 private:
  workspace_bounds bounds_;
  double max_gripper_;
};

// Pure map from (observation, state) to a predicted next end-effector state.
using predictor_fn =
    std::function<robot_state(const observation&, const robot_state&)>;

// Regression-style policy: candidates are Gaussian perturbations of the
// predictor's output, scores are products of the per-component densities.
class gaussian_regression_policy : public policy_interface {
 public:
  struct params {
    double sigma_pos = 0.05;   // meters
    double sigma_rot = 15.0;   // degrees
    double sigma_grip = 0.01;  // meters
  };

  explicit gaussian_regression_policy(predictor_fn predictor)
      : gaussian_regression_policy(std::move(predictor), params()) {}
  gaussian_regression_policy(predictor_fn predictor, params p);

  std::vector<robot_state> sample_actions(const observation& obs,
                                          const robot_state& state, int n,
                                          std::uint64_t seed) const override;
  score_vector action_probabilities(
      const observation& obs, const robot_state& state,
      const std::vector<robot_state>& candidates) const override;
  std::string name() const override { return "gaussian"; }

  robot_state predict(const observation& obs, const robot_state& state) const;

 private:
  predictor_fn predictor_;
  params params_;
};

// Discrete waypoint head: a fixed proposal set with per-proposal weights and
// a deterministic orientation/gripper head.  Sampling requires n to equal the
// proposal count; scores are the stored weights.
class sampled_waypoint_policy : public policy_interface {
 public:
  sampled_waypoint_policy(std::vector<std::array<double, 3>> proposals,
                          score_vector weights,
                          std::array<double, 3> orientation = {0, 0, 0},
                          double gripper = 0.0);

  std::vector<robot_state> sample_actions(const observation& obs,
                                          const robot_state& state, int n,
                                          std::uint64_t seed) const override;
  score_vector action_probabilities(
      const observation& obs, const robot_state& state,
      const std::vector<robot_state>& candidates) const override;
  std::string name() const override { return "waypoint"; }

  std::size_t proposal_count() const { return proposals_.size(); }

 private:
  std::vector<std::array<double, 3>> proposals_;
  score_vector weights_;
  std::array<double, 3> orientation_;
  double gripper_;
};

// Forecasts where a candidate action would leave the end-effector.
//   identity: the candidate itself.
//   clamped:  position interpolates toward the candidate by at most max_step
//             and clamps into the workspace; orientation and gripper are set
//             directly.
enum class dynamics_mode { identity, clamped };

class dynamics_model {
 public:
  dynamics_model() = default;
  dynamics_model(dynamics_mode mode, double max_step,
                 std::optional<workspace_bounds> bounds = std::nullopt)
      : mode_(mode), max_step_(max_step), bounds_(bounds) {}

  robot_state forecast(const robot_state& current,
                       const robot_state& action) const;
  std::vector<robot_state> forecast_all(
      const robot_state& current,
      const std::vector<robot_state>& candidates) const;

  dynamics_mode mode() const { return mode_; }
  double max_step() const { return max_step_; }

 private:
  dynamics_mode mode_ = dynamics_mode::identity;
  double max_step_ = 0.1;
  std::optional<workspace_bounds> bounds_;
};

// Scripted stand-in for a trained policy's prediction head.  Knows the task
// layout through the observation snapshot and can be degraded with a constant
// bias or deterministic per-state jitter.
struct expert_config {
  std::vector<std::string> press_order;  // ordered-button tasks
  std::string target_object;             // reach tasks
  std::string block_object;               // slide tasks (pushes block_object
  std::string zone_object;                 // toward zone_object)
  std::array<double, 3> bias{0.0, 0.0, 0.0};
  double noise = 0.0;        // stddev of deterministic positional jitter
  double hover_height = 0.06;
  double align_radius = 0.02;
};

predictor_fn make_scripted_expert(expert_config cfg);

}  // namespace grappa
