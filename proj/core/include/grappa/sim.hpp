#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "grappa/grounding.hpp"
#include "grappa/types.hpp"

namespace grappa {

struct workspace_spec {
  workspace_bounds bounds;
  double table_height = 0.0;
  double max_step = 0.1;  // meters per control step
  int timeout = 20;       // steps
};

enum class task_kind { push_buttons_ordered, reach_target, slide_block_to_target };

std::string to_string(task_kind k);
task_kind task_kind_from_string(const std::string& s);

struct task_spec {
  std::string id;
  task_kind kind = task_kind::reach_target;
  workspace_spec workspace;
  std::vector<scene_object> objects;  // template poses, before placement jitter
  robot_state home;
  std::string instruction;

  // push_buttons_ordered
  std::vector<std::string> press_order;
  double press_radius = 0.02;

  // reach_target / slide_block_to_target
  std::string target_object;
  double tolerance = 0.03;
  std::string block_object;
  std::string zone_object;
  double contact_radius = 0.05;

  thesaurus synonyms_table;

  // Names whose positions feed the feature vector, in task order.
  std::vector<std::string> tracked_objects() const;
};

// Reads a task fixture (workspace + objects + task block + optional
// thesaurus) from a JSON file.  Throws fixture_error on anything malformed.
task_spec load_task_fixture(const std::string& path);

struct sim_state {
  robot_state ee;
  std::vector<scene_object> objects;  // current poses
  std::map<std::string, bool> pressed;
  std::vector<std::string> press_sequence;  // order in which presses fired
  int step_count = 0;
  std::uint64_t seed = 0;
};

// Deterministic kinematic tabletop.  The end-effector moves toward the
// commanded position by at most max_step per step (clamped to the workspace);
// orientation and gripper are set directly.  A button fires when the
// end-effector comes within press_radius of its top center while approaching
// from above.  A block slides with the end-effector's horizontal motion while
// in contact.
class simulator {
 public:
  explicit simulator(task_spec spec);

  sim_state reset(std::uint64_t seed) const;
  observation observe(const sim_state& s) const;

  // Advances one control step.  Throws episode_over_error once step_count
  // has reached the timeout.
  void step(sim_state& s, const robot_state& action) const;

  struct outcome {
    bool success = false;
    failure_class failure = failure_class::none;
  };
  outcome check(const sim_state& s) const;

  // True once the press sequence can no longer complete in order.
  bool order_violated(const sim_state& s) const;

  // End-effector array + tracked object positions + one 0/1 flag per button.
  std::vector<double> frame_features(const sim_state& s) const;

  const task_spec& spec() const { return spec_; }

 private:
  task_spec spec_;
};

}  // namespace grappa
