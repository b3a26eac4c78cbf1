#include <doctest/doctest.h>

#include <cmath>
#include <memory>

#include "grappa/errors.hpp"
#include "grappa/policy.hpp"
#include "grappa/sim.hpp"

using namespace grappa;

namespace {

workspace_bounds small_bounds() {
  workspace_bounds wb;
  wb.x = {0.1, 0.5};
  wb.y = {-0.25, 0.25};
  wb.z = {0.0, 0.25};
  return wb;
}

observation empty_obs() { return observation{}; }

// Per-component Gaussian density product, written independently of the
// policy implementation to serve as its oracle.
double gaussian_score_oracle(const robot_state& mean, const robot_state& c,
                             const gaussian_regression_policy::params& p) {
  double q = 0.0;
  for (int i = 0; i < 3; ++i) {
    q += std::pow((c.position[i] - mean.position[i]) / p.sigma_pos, 2.0);
    q += std::pow((c.orientation[i] - mean.orientation[i]) / p.sigma_rot, 2.0);
  }
  q += std::pow((c.gripper - mean.gripper) / p.sigma_grip, 2.0);
  return std::exp(-0.5 * q);
}

}  // namespace

TEST_CASE("random policy samples inside the workspace with unit scores") {
  random_policy policy(small_bounds(), 0.08);
  auto candidates = policy.sample_actions(empty_obs(), {}, 256, 9);
  REQUIRE(candidates.size() == 256);
  for (const auto& c : candidates) {
    CHECK(small_bounds().contains(c.position));
    CHECK(c.gripper >= 0.0);
    CHECK(c.gripper <= 0.08);
    for (double o : c.orientation) {
      CHECK(o >= -180.0);
      CHECK(o <= 180.0);
    }
  }
  score_vector scores = policy.action_probabilities(empty_obs(), {}, candidates);
  REQUIRE(scores.size() == candidates.size());
  for (double s : scores) CHECK(s == 1.0);
}

TEST_CASE("random policy is deterministic in the seed only") {
  random_policy policy(small_bounds());
  auto a = policy.sample_actions(empty_obs(), {}, 32, 1234);
  auto b = policy.sample_actions(empty_obs(), {}, 32, 1234);
  auto c = policy.sample_actions(empty_obs(), {}, 32, 1235);
  CHECK(a == b);
  CHECK(a != c);
  CHECK_THROWS_AS(policy.sample_actions(empty_obs(), {}, 0, 1), error);
  CHECK_THROWS_AS(policy.action_probabilities(empty_obs(), {}, {}),
                  empty_vector_error);
}

TEST_CASE("gaussian policy scores match the density-product oracle") {
  robot_state mean;
  mean.position = {0.3, 0.0, 0.1};
  mean.gripper = 0.04;
  gaussian_regression_policy::params p;
  gaussian_regression_policy policy(
      [mean](const observation&, const robot_state&) { return mean; }, p);

  robot_state at_mean = mean;
  robot_state off_pos = mean;
  off_pos.position[0] += p.sigma_pos;  // one positional sigma away
  robot_state off_rot = mean;
  off_rot.orientation[2] += 2.0 * p.sigma_rot;
  robot_state off_grip = mean;
  off_grip.gripper += p.sigma_grip;

  score_vector scores = policy.action_probabilities(
      empty_obs(), {}, {at_mean, off_pos, off_rot, off_grip});
  REQUIRE(scores.size() == 4);
  CHECK(scores[0] == doctest::Approx(1.0));
  CHECK(scores[1] == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  CHECK(scores[2] == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
  CHECK(scores[3] == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  for (std::size_t i = 0; i < scores.size(); ++i) {
    robot_state c = i == 0 ? at_mean : i == 1 ? off_pos : i == 2 ? off_rot : off_grip;
    CHECK(scores[i] == doctest::Approx(gaussian_score_oracle(mean, c, p)).epsilon(1e-12));
  }
}

TEST_CASE("gaussian policy samples cluster around the prediction") {
  robot_state mean;
  mean.position = {0.3, 0.0, 0.1};
  mean.gripper = 0.04;
  gaussian_regression_policy::params p;
  p.sigma_pos = 0.02;
  gaussian_regression_policy policy(
      [mean](const observation&, const robot_state&) { return mean; }, p);

  auto candidates = policy.sample_actions(empty_obs(), {}, 2000, 5);
  REQUIRE(candidates.size() == 2000);
  double mx = 0.0;
  for (const auto& c : candidates) {
    mx += c.position[0];
    CHECK(c.gripper >= 0.0);  // gripper never goes negative
  }
  mx /= candidates.size();
  CHECK(mx == doctest::Approx(mean.position[0]).epsilon(0.01));

  auto again = policy.sample_actions(empty_obs(), {}, 2000, 5);
  CHECK(candidates == again);
}

TEST_CASE("gaussian policy rejects bad construction") {
  gaussian_regression_policy::params bad;
  bad.sigma_pos = 0.0;
  auto predictor = [](const observation&, const robot_state& s) { return s; };
  CHECK_THROWS_AS(gaussian_regression_policy(predictor, bad), error);
  CHECK_THROWS_AS(gaussian_regression_policy(predictor_fn{}), error);
}

TEST_CASE("waypoint policy serves its proposals verbatim") {
  std::vector<std::array<double, 3>> proposals = {
      {0.2, 0.0, 0.1}, {0.3, 0.1, 0.1}, {0.4, -0.1, 0.2}};
  sampled_waypoint_policy policy(proposals, {0.2, 0.5, 0.3}, {0, 0, 90}, 0.02);

  auto candidates = policy.sample_actions(empty_obs(), {}, 3, 77);
  REQUIRE(candidates.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(candidates[i].position == proposals[i]);
    CHECK(candidates[i].orientation == std::array<double, 3>{0, 0, 90});
    CHECK(candidates[i].gripper == 0.02);
  }
  CHECK(policy.action_probabilities(empty_obs(), {}, candidates) ==
        score_vector{0.2, 0.5, 0.3});
}

TEST_CASE("waypoint policy insists on its exact proposal count") {
  sampled_waypoint_policy policy({{0, 0, 0}, {1, 1, 1}}, {1.0, 1.0});
  CHECK_THROWS_AS(policy.sample_actions(empty_obs(), {}, 3, 0),
                  mismatched_candidates_error);
  CHECK_THROWS_AS(policy.action_probabilities(empty_obs(), {}, {robot_state{}}),
                  mismatched_candidates_error);
  CHECK_THROWS_AS(sampled_waypoint_policy({}, {}), error);
  CHECK_THROWS_AS(sampled_waypoint_policy({{0, 0, 0}}, {1.0, 2.0}),
                  length_mismatch_error);
  CHECK_THROWS_AS(sampled_waypoint_policy({{0, 0, 0}}, {-1.0}), error);
}

TEST_CASE("identity dynamics echo the action") {
  dynamics_model identity;
  robot_state current;
  robot_state action;
  action.position = {5.0, 5.0, 5.0};  // far outside any workspace
  CHECK(identity.forecast(current, action) == action);
}

TEST_CASE("clamped dynamics cap the step and honor the workspace") {
  workspace_bounds wb = small_bounds();
  dynamics_model model(dynamics_mode::clamped, 0.1, wb);

  robot_state current;
  current.position = {0.3, 0.0, 0.1};

  // short move: passes through unchanged
  robot_state near = current;
  near.position = {0.33, 0.04, 0.1};
  CHECK(model.forecast(current, near).position == near.position);

  // long move: truncated to max_step along the straight line (oracle below)
  robot_state far = current;
  far.position = {0.5, 0.2, 0.25};
  auto got = model.forecast(current, far).position;
  double dx = far.position[0] - current.position[0];
  double dy = far.position[1] - current.position[1];
  double dz = far.position[2] - current.position[2];
  double len = std::sqrt(dx * dx + dy * dy + dz * dz);
  std::array<double, 3> want = {current.position[0] + dx / len * 0.1,
                                current.position[1] + dy / len * 0.1,
                                current.position[2] + dz / len * 0.1};
  CHECK(got[0] == doctest::Approx(want[0]).epsilon(1e-12));
  CHECK(got[1] == doctest::Approx(want[1]).epsilon(1e-12));
  CHECK(got[2] == doctest::Approx(want[2]).epsilon(1e-12));
  double step = std::sqrt(std::pow(got[0] - current.position[0], 2) +
                          std::pow(got[1] - current.position[1], 2) +
                          std::pow(got[2] - current.position[2], 2));
  CHECK(step == doctest::Approx(0.1).epsilon(1e-12));

  // a command outside the workspace clamps back inside
  robot_state outside = current;
  outside.position = {0.35, 0.0, -0.2};
  auto clamped = model.forecast(current, outside).position;
  CHECK(clamped[2] >= wb.z[0]);

  // orientation and gripper transfer directly
  robot_state twist = current;
  twist.orientation = {10, 20, 30};
  twist.gripper = 0.07;
  robot_state out = model.forecast(current, twist);
  CHECK(out.orientation == twist.orientation);
  CHECK(out.gripper == twist.gripper);

  // forecast_all is the elementwise map
  auto all = model.forecast_all(current, {near, far, twist});
  REQUIRE(all.size() == 3);
  CHECK(all[0] == model.forecast(current, near));
  CHECK(all[1] == model.forecast(current, far));
  CHECK(all[2] == model.forecast(current, twist));
}

TEST_CASE("scripted expert drives the ordered-button dance") {
  task_spec spec = load_task_fixture(GRAPPA_FIXTURE_DIR "/buttons3.json");
  simulator sim(spec);
  sim_state st = sim.reset(3);
  observation obs = sim.observe(st);

  expert_config cfg;
  cfg.press_order = spec.press_order;
  predictor_fn expert = make_scripted_expert(cfg);

  const scene_object* maroon = obs.snapshot->find_name("maroon button");
  REQUIRE(maroon != nullptr);
  std::array<double, 3> top = {maroon->pose[0], maroon->pose[1],
                               maroon->pose[2] + maroon->size[0] / 2.0};

  // far away: aim for the hover point above the first unpressed button
  robot_state away;
  away.position = {0.30, 0.20, 0.20};
  robot_state hover = expert(obs, away);
  CHECK(hover.position[0] == doctest::Approx(top[0]));
  CHECK(hover.position[1] == doctest::Approx(top[1]));
  CHECK(hover.position[2] == doctest::Approx(top[2] + cfg.hover_height));

  // aligned above it: descend onto the top center
  robot_state above;
  above.position = {top[0], top[1], top[2] + cfg.hover_height};
  robot_state press = expert(obs, above);
  CHECK(press.position[0] == doctest::Approx(top[0]));
  CHECK(press.position[1] == doctest::Approx(top[1]));
  CHECK(press.position[2] == doctest::Approx(top[2]));

  // once the first button is pressed the target advances to the second
  sim_state later = st;
  later.pressed["maroon button"] = true;
  observation obs2 = sim.observe(later);
  const scene_object* teal = obs2.snapshot->find_name("teal button");
  robot_state toward_teal = expert(obs2, away);
  CHECK(toward_teal.position[0] == doctest::Approx(teal->pose[0]));
  CHECK(toward_teal.position[1] == doctest::Approx(teal->pose[1]));
}

TEST_CASE("expert bias and jitter degrade the prediction controllably") {
  task_spec spec = load_task_fixture(GRAPPA_FIXTURE_DIR "/reach.json");
  simulator sim(spec);
  observation obs = sim.observe(sim.reset(3));
  const scene_object* disc = obs.snapshot->find_name(spec.target_object);
  REQUIRE(disc != nullptr);

  expert_config clean;
  clean.target_object = spec.target_object;
  robot_state state;
  state.position = {0.2, -0.1, 0.15};
  robot_state base = make_scripted_expert(clean)(obs, state);
  CHECK(base.position == disc->pose);

  expert_config biased = clean;
  biased.bias = {0.0, 0.09, 0.0};
  robot_state shifted = make_scripted_expert(biased)(obs, state);
  CHECK(shifted.position[1] == doctest::Approx(base.position[1] + 0.09));
  CHECK(shifted.position[0] == doctest::Approx(base.position[0]));

  expert_config noisy = clean;
  noisy.noise = 0.02;
  predictor_fn jittered = make_scripted_expert(noisy);
  robot_state j1 = jittered(obs, state);
  robot_state j2 = jittered(obs, state);
  CHECK(j1 == j2);  // jitter is a pure function of the query state
  CHECK(j1.position != base.position);
  robot_state other = state;
  other.position[0] += 0.01;
  CHECK(jittered(obs, other).position != j1.position);
}

TEST_CASE("slide expert stands behind the block, then pushes through") {
  task_spec spec = load_task_fixture(GRAPPA_FIXTURE_DIR "/slide.json");
  simulator sim(spec);
  observation obs = sim.observe(sim.reset(4));
  const scene_object* block = obs.snapshot->find_name(spec.block_object);
  const scene_object* zone = obs.snapshot->find_name(spec.zone_object);
  REQUIRE(block != nullptr);
  REQUIRE(zone != nullptr);

  expert_config cfg;
  cfg.block_object = spec.block_object;
  cfg.zone_object = spec.zone_object;
  predictor_fn expert = make_scripted_expert(cfg);

  double dx = zone->pose[0] - block->pose[0];
  double dy = zone->pose[1] - block->pose[1];
  double len = std::sqrt(dx * dx + dy * dy);
  std::array<double, 2> behind = {block->pose[0] - dx / len * 0.05,
                                  block->pose[1] - dy / len * 0.05};

  robot_state far;
  far.position = {0.1, -0.2, 0.2};
  robot_state stage = expert(obs, far);
  CHECK(stage.position[0] == doctest::Approx(behind[0]));
  CHECK(stage.position[1] == doctest::Approx(behind[1]));
  CHECK(stage.position[2] == doctest::Approx(block->pose[2]));

  robot_state staged;
  staged.position = {behind[0], behind[1], block->pose[2]};
  robot_state push = expert(obs, staged);
  CHECK(push.position[0] == doctest::Approx(zone->pose[0]));
  CHECK(push.position[1] == doctest::Approx(zone->pose[1]));
}
