#include <doctest/doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "grappa/errors.hpp"
#include "grappa/sim.hpp"

using namespace grappa;

namespace {

// One button, no jitter, generous step limit: every geometric claim in the
// press tests can be stated exactly.
task_spec one_button_spec() {
  task_spec spec;
  spec.id = "unit_button";
  spec.kind = task_kind::push_buttons_ordered;
  spec.workspace.bounds.x = {0.1, 0.5};
  spec.workspace.bounds.y = {-0.25, 0.25};
  spec.workspace.bounds.z = {0.0, 0.25};
  spec.workspace.max_step = 0.2;
  spec.workspace.timeout = 10;
  spec.home.position = {0.30, 0.00, 0.20};

  scene_object button;
  button.id = "btn";
  button.name = "button";
  button.pose = {0.30, 0.00, 0.02};
  button.size = {0.04, 0.06, 0.06};  // top face sits at z = 0.04
  spec.objects.push_back(button);
  spec.press_order = {"button"};
  spec.press_radius = 0.03;
  return spec;
}

task_spec two_button_spec() {
  task_spec spec = one_button_spec();
  spec.objects[0].name = "first button";
  spec.press_order = {"first button", "second button"};
  scene_object second = spec.objects[0];
  second.id = "btn2";
  second.name = "second button";
  second.pose = {0.30, 0.15, 0.02};
  spec.objects.push_back(second);
  return spec;
}

task_spec slide_spec() {
  task_spec spec;
  spec.id = "unit_slide";
  spec.kind = task_kind::slide_block_to_target;
  spec.workspace.bounds.x = {0.1, 0.5};
  spec.workspace.bounds.y = {-0.25, 0.25};
  spec.workspace.bounds.z = {0.0, 0.25};
  spec.workspace.max_step = 0.2;
  spec.workspace.timeout = 10;
  spec.home.position = {0.25, 0.00, 0.03};

  scene_object block;
  block.id = "blk";
  block.name = "block";
  block.pose = {0.30, 0.00, 0.02};
  block.size = {0.04, 0.04, 0.04};
  spec.objects.push_back(block);
  scene_object zone;
  zone.id = "zn";
  zone.name = "zone";
  zone.pose = {0.40, 0.00, 0.015};
  zone.size = {0.03, 0.10, 0.10};
  spec.objects.push_back(zone);
  spec.block_object = "block";
  spec.zone_object = "zone";
  spec.tolerance = 0.04;
  spec.contact_radius = 0.05;
  return spec;
}

std::string write_temp_fixture(const std::string& name, const std::string& body) {
  std::string path = "grappa_fixture_" + name + ".json";
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("fixture loading fills the whole task spec") {
  task_spec spec = load_task_fixture(GRAPPA_FIXTURE_DIR "/buttons3.json");
  CHECK(spec.id == "buttons3");
  CHECK(spec.kind == task_kind::push_buttons_ordered);
  CHECK(spec.instruction.find("maroon") != std::string::npos);
  CHECK(spec.workspace.max_step == 0.1);
  CHECK(spec.workspace.timeout == 20);
  REQUIRE(spec.objects.size() == 3);
  CHECK(spec.objects[0].id == "btn_maroon");
  CHECK(spec.press_order == std::vector<std::string>{"maroon button", "teal button",
                                                     "navy button"});
  CHECK(spec.press_radius == 0.03);
  CHECK(spec.synonyms_table.count("maroon button") == 1);
  CHECK(spec.tracked_objects() == spec.press_order);
}

TEST_CASE("fixture loading rejects malformed inputs") {
  CHECK_THROWS_AS(load_task_fixture("/nonexistent.json"), fixture_error);

  std::string bad_json = write_temp_fixture("badjson", "{not json");
  CHECK_THROWS_AS(load_task_fixture(bad_json), fixture_error);
  std::remove(bad_json.c_str());

  std::string bad_kind = write_temp_fixture("badkind", R"({
    "id": "x", "kind": "juggle",
    "workspace": {"x": [0,1], "y": [0,1], "z": [0,1]},
    "objects": []
  })");
  CHECK_THROWS_AS(load_task_fixture(bad_kind), fixture_error);
  std::remove(bad_kind.c_str());

  std::string ghost = write_temp_fixture("ghost", R"({
    "id": "x", "kind": "reach_target",
    "workspace": {"x": [0,1], "y": [0,1], "z": [0,1]},
    "objects": [{"name": "cube", "pose": [0.5,0.5,0.5], "size": [0.1,0.1,0.1]}],
    "task": {"target": "sphere"}
  })");
  CHECK_THROWS_AS(load_task_fixture(ghost), fixture_error);
  std::remove(ghost.c_str());

  std::string away = write_temp_fixture("home", R"({
    "id": "x", "kind": "reach_target",
    "workspace": {"x": [0,1], "y": [0,1], "z": [0,1]},
    "home": {"position": [5,5,5]},
    "objects": [{"name": "cube", "pose": [0.5,0.5,0.5], "size": [0.1,0.1,0.1]}],
    "task": {"target": "cube"}
  })");
  CHECK_THROWS_AS(load_task_fixture(away), fixture_error);
  std::remove(away.c_str());

  std::string squashed = write_temp_fixture("squashed", R"({
    "id": "x", "kind": "reach_target",
    "workspace": {"x": [0,1], "y": [0,1], "z": [0,1]},
    "objects": [{"name": "cube", "pose": [0.5,0.5,0.5], "size": [0.1,0.0,0.1]}],
    "task": {"target": "cube"}
  })");
  CHECK_THROWS_AS(load_task_fixture(squashed), fixture_error);
  std::remove(squashed.c_str());
}

TEST_CASE("reset applies bounded, seed-deterministic placement jitter") {
  task_spec spec = load_task_fixture(GRAPPA_FIXTURE_DIR "/buttons3.json");
  simulator sim(spec);

  sim_state a = sim.reset(5);
  sim_state b = sim.reset(5);
  sim_state c = sim.reset(6);

  CHECK(a.ee == spec.home);
  CHECK(a.step_count == 0);
  REQUIRE(a.objects.size() == 3);
  for (const auto& [name, pressed] : a.pressed) CHECK_FALSE(pressed);

  bool any_differ = false;
  for (std::size_t i = 0; i < a.objects.size(); ++i) {
    CHECK(a.objects[i].pose == b.objects[i].pose);  // same seed, same layout
    if (a.objects[i].pose != c.objects[i].pose) any_differ = true;
    for (int axis = 0; axis < 3; ++axis) {
      double delta = std::abs(a.objects[i].pose[axis] - spec.objects[i].pose[axis]);
      CHECK(delta <= spec.objects[i].jitter[axis] + 1e-12);
    }
  }
  CHECK(any_differ);  // different seed moves at least one object
}

TEST_CASE("observe mirrors the live state into an immutable snapshot") {
  simulator sim(one_button_spec());
  sim_state s = sim.reset(1);
  observation obs = sim.observe(s);
  REQUIRE(obs.snapshot != nullptr);
  CHECK(obs.snapshot->objects.size() == 1);
  CHECK(obs.snapshot->pressed.at("button") == false);
  CHECK(obs.snapshot->step == 0);
  CHECK(obs.snapshot->bounds.x == sim.spec().workspace.bounds.x);
}

TEST_CASE("stepping clamps motion to max_step and the workspace") {
  simulator sim(one_button_spec());
  sim_state s = sim.reset(1);

  robot_state cmd;
  cmd.position = {0.30, 0.00, -1.0};  // far below the floor
  cmd.gripper = -0.5;                 // negative grip request
  sim.step(s, cmd);

  // the z-target clamps to 0.0, so the move shrinks to max_step toward it
  CHECK(s.ee.position[0] == doctest::Approx(0.30));
  CHECK(s.ee.position[1] == doctest::Approx(0.00));
  CHECK(s.ee.position[2] == doctest::Approx(0.20 - 0.2));
  CHECK(s.ee.gripper == 0.0);
  CHECK(s.step_count == 1);

  robot_state nan_cmd;
  nan_cmd.position[0] = std::nan("");
  CHECK_THROWS_AS(sim.step(s, nan_cmd), error);
}

TEST_CASE("episodes cannot step past their timeout") {
  task_spec spec = one_button_spec();
  spec.workspace.timeout = 3;
  simulator sim(spec);
  sim_state s = sim.reset(1);
  robot_state stay;
  stay.position = spec.home.position;
  for (int i = 0; i < 3; ++i) sim.step(s, stay);
  CHECK_THROWS_AS(sim.step(s, stay), episode_over_error);
  simulator::outcome out = sim.check(s);
  CHECK_FALSE(out.success);
  CHECK(out.failure == failure_class::timeout);
}

TEST_CASE("a press requires proximity and an approach from above") {
  simulator sim(one_button_spec());
  const std::array<double, 3> top = {0.30, 0.00, 0.04};

  // straight descent from home onto the top face: press fires
  {
    sim_state s = sim.reset(1);
    robot_state cmd;
    cmd.position = top;
    sim.step(s, cmd);  // 0.20 -> 0.04 is within one 0.2 step
    CHECK(s.pressed.at("button"));
    CHECK(s.press_sequence == std::vector<std::string>{"button"});
    CHECK(sim.check(s).success);
    CHECK(sim.check(s).failure == failure_class::none);
  }

  // lateral entry at button height: inside the radius but never from above
  {
    sim_state s = sim.reset(1);
    robot_state cmd;
    cmd.position = {0.30, 0.10, 0.03};  // descend away from the button
    sim.step(s, cmd);
    CHECK_FALSE(s.pressed.at("button"));
    cmd.position = {0.30, 0.00, 0.04};  // slide across at top height
    sim.step(s, cmd);
    CHECK_FALSE(s.pressed.at("button"));  // prev z 0.03 was not above 0.04
    CHECK(s.press_sequence.empty());
  }

  // hovering inside the radius without touching: no press
  {
    sim_state s = sim.reset(1);
    robot_state cmd;
    cmd.position = {0.30, 0.00, 0.08};  // 0.04 above the top, outside radius
    sim.step(s, cmd);
    CHECK_FALSE(s.pressed.at("button"));
  }
}

TEST_CASE("a press fires only once per button") {
  simulator sim(one_button_spec());
  sim_state s = sim.reset(1);
  robot_state down;
  down.position = {0.30, 0.00, 0.04};
  sim.step(s, down);
  robot_state up;
  up.position = {0.30, 0.00, 0.20};
  sim.step(s, up);
  sim.step(s, down);  // second descent
  CHECK(s.press_sequence.size() == 1);
}

TEST_CASE("out-of-order presses are an unrecoverable behavior failure") {
  simulator sim(two_button_spec());
  sim_state s = sim.reset(1);
  robot_state cmd;
  cmd.position = {0.30, 0.15, 0.04};  // descend onto the SECOND button
  sim.step(s, cmd);  // truncated move already lands inside the press ball
  sim.step(s, cmd);
  REQUIRE(s.press_sequence == std::vector<std::string>{"second button"});
  CHECK(sim.order_violated(s));
  simulator::outcome out = sim.check(s);
  CHECK_FALSE(out.success);
  CHECK(out.failure == failure_class::behavior);
}

TEST_CASE("pressing in order succeeds and features track the flags") {
  simulator sim(two_button_spec());
  sim_state s = sim.reset(1);

  // features: 7 end-effector + 3 per button + 1 flag per button
  CHECK(sim.frame_features(s).size() == 7 + 6 + 2);

  robot_state cmd;
  cmd.position = {0.30, 0.00, 0.04};
  sim.step(s, cmd);
  CHECK(sim.frame_features(s)[13] == 1.0);  // first flag set
  CHECK(sim.frame_features(s)[14] == 0.0);

  cmd.position = {0.30, 0.15, 0.20};  // re-stage above the second button
  sim.step(s, cmd);
  sim.step(s, cmd);
  cmd.position = {0.30, 0.15, 0.04};
  sim.step(s, cmd);
  CHECK(s.press_sequence ==
        std::vector<std::string>{"first button", "second button"});
  CHECK_FALSE(sim.order_violated(s));
  CHECK(sim.check(s).success);
  CHECK(sim.frame_features(s)[14] == 1.0);
}

TEST_CASE("reach succeeds within tolerance of the placed target") {
  task_spec spec = load_task_fixture(GRAPPA_FIXTURE_DIR "/reach.json");
  simulator sim(spec);
  sim_state s = sim.reset(9);
  CHECK_FALSE(sim.check(s).success);

  const scene_object* disc = nullptr;
  for (const auto& o : s.objects) {
    if (o.name == spec.target_object) disc = &o;
  }
  REQUIRE(disc != nullptr);

  // walk the gripper to the disc center; plenty of steps at 0.1 m each
  robot_state cmd;
  cmd.position = disc->pose;
  for (int i = 0; i < 8 && !sim.check(s).success; ++i) sim.step(s, cmd);
  CHECK(sim.check(s).success);
  CHECK(sim.frame_features(s).size() == 7 + 3);
}

TEST_CASE("blocks drag with the gripper only while in contact") {
  simulator sim(slide_spec());
  sim_state s = sim.reset(1);

  // pass high above the block: no contact, no motion
  robot_state high;
  high.position = {0.35, 0.00, 0.20};
  sim_state hover = s;
  sim.step(hover, high);
  CHECK(hover.objects[0].pose == std::array<double, 3>{0.30, 0.00, 0.02});

  // skim at block height through the contact radius: the block slides by
  // exactly the end-effector's horizontal displacement
  robot_state skim;
  skim.position = {0.35, 0.00, 0.03};
  sim.step(s, skim);
  CHECK(s.ee.position == std::array<double, 3>{0.35, 0.00, 0.03});
  CHECK(s.objects[0].pose[0] == doctest::Approx(0.40));
  CHECK(s.objects[0].pose[1] == doctest::Approx(0.00));
  CHECK(sim.check(s).success);  // block center now sits on the zone
}

TEST_CASE("slide features track both block and zone") {
  simulator sim(slide_spec());
  sim_state s = sim.reset(1);
  auto f = sim.frame_features(s);
  REQUIRE(f.size() == 7 + 3 + 3);
  CHECK(f[7] == doctest::Approx(0.30));   // block x
  CHECK(f[10] == doctest::Approx(0.40));  // zone x
}
