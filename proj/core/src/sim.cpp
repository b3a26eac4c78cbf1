#include "grappa/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>

#include <nlohmann/json.hpp>

#include "grappa/errors.hpp"
#include "grappa/rng.hpp"

namespace grappa {
namespace {

using nlohmann::json;

double xy_distance(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  double dx = a[0] - b[0];
  double dy = a[1] - b[1];
  return std::sqrt(dx * dx + dy * dy);
}

double position_distance(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  double acc = 0.0;
  for (int i = 0; i < 3; ++i) {
    double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

std::array<double, 3> read_vec3(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw fixture_error(what + " must be an array of 3 numbers");
  std::array<double, 3> out{};
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw fixture_error(what + " must contain only numbers");
    out[i] = j[i].get<double>();
  }
  return out;
}

std::array<double, 2> read_range(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2) throw fixture_error(what + " must be an array of 2 numbers");
  return {j[0].get<double>(), j[1].get<double>()};
}

scene_object read_object(const json& j) {
  scene_object obj;
  if (!j.contains("name")) throw fixture_error("object missing name");
  obj.name = j.at("name").get<std::string>();
  obj.pose = read_vec3(j.at("pose"), "object pose");
  obj.size = read_vec3(j.at("size"), "object size");
  if (j.contains("orientation")) obj.orientation = read_vec3(j.at("orientation"), "object orientation");
  if (j.contains("color")) obj.color = j.at("color").get<std::string>();
  if (j.contains("parent")) obj.parent = j.at("parent").get<std::string>();
  if (j.contains("distractor")) obj.distractor = j.at("distractor").get<bool>();
  if (j.contains("synonyms")) {
    for (const auto& s : j.at("synonyms")) obj.synonyms.push_back(s.get<std::string>());
  }
  if (j.contains("jitter")) obj.jitter = read_vec3(j.at("jitter"), "object jitter");
  return obj;
}

}  // namespace

std::string to_string(task_kind k) {
  switch (k) {
    case task_kind::push_buttons_ordered: return "push_buttons_ordered";
    case task_kind::reach_target: return "reach_target";
    case task_kind::slide_block_to_target: return "slide_block_to_target";
  }
  return "reach_target";
}

task_kind task_kind_from_string(const std::string& s) {
  if (s == "push_buttons_ordered") return task_kind::push_buttons_ordered;
  if (s == "reach_target") return task_kind::reach_target;
  if (s == "slide_block_to_target") return task_kind::slide_block_to_target;
  throw fixture_error("unknown task kind: " + s);
}

std::vector<std::string> task_spec::tracked_objects() const {
  switch (kind) {
    case task_kind::push_buttons_ordered: return press_order;
    case task_kind::reach_target: return {target_object};
    case task_kind::slide_block_to_target: return {block_object, zone_object};
  }
  return {};
}

task_spec load_task_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fixture_error("cannot open fixture: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw fixture_error("invalid fixture JSON in " + path + ": " + e.what());
  }

  task_spec spec;
  try {
    spec.id = j.at("id").get<std::string>();
    spec.kind = task_kind_from_string(j.at("kind").get<std::string>());
    spec.instruction = j.value("instruction", std::string{});

    const json& ws = j.at("workspace");
    spec.workspace.bounds.x = read_range(ws.at("x"), "workspace x");
    spec.workspace.bounds.y = read_range(ws.at("y"), "workspace y");
    spec.workspace.bounds.z = read_range(ws.at("z"), "workspace z");
    spec.workspace.table_height = ws.value("table_height", 0.0);
    spec.workspace.max_step = ws.value("max_step", 0.1);
    spec.workspace.timeout = ws.value("timeout", 20);
    if (spec.workspace.max_step <= 0.0) throw fixture_error("max_step must be positive");
    if (spec.workspace.timeout <= 0) throw fixture_error("timeout must be positive");

    for (const auto& oj : j.at("objects")) {
      scene_object obj = read_object(oj);
      if (oj.contains("id")) obj.id = oj.at("id").get<std::string>();
      spec.objects.push_back(std::move(obj));
    }
    for (std::size_t i = 0; i < spec.objects.size(); ++i) {
      if (spec.objects[i].id.empty()) {
        spec.objects[i].id = "obj" + std::to_string(i);
      }
    }

    if (j.contains("home")) {
      const json& h = j.at("home");
      spec.home.position = read_vec3(h.at("position"), "home position");
      if (h.contains("orientation")) spec.home.orientation = read_vec3(h.at("orientation"), "home orientation");
      spec.home.gripper = h.value("gripper", 0.0);
    } else {
      spec.home.position = spec.workspace.bounds.center();
      spec.home.position[2] = spec.workspace.bounds.z[1];
    }

    if (j.contains("task")) {
      const json& t = j.at("task");
      if (spec.kind == task_kind::push_buttons_ordered) {
        for (const auto& n : t.at("press_order")) spec.press_order.push_back(n.get<std::string>());
        spec.press_radius = t.value("press_radius", 0.02);
      } else if (spec.kind == task_kind::reach_target) {
        spec.target_object = t.at("target").get<std::string>();
        spec.tolerance = t.value("tolerance", 0.03);
      } else {
        spec.block_object = t.at("block").get<std::string>();
        spec.zone_object = t.at("zone").get<std::string>();
        spec.tolerance = t.value("tolerance", 0.03);
        spec.contact_radius = t.value("contact_radius", 0.05);
      }
    }

    if (j.contains("synonyms")) {
      for (auto it = j.at("synonyms").begin(); it != j.at("synonyms").end(); ++it) {
        thesaurus_entry entry;
        if (it.value().contains("synonyms")) {
          for (const auto& s : it.value().at("synonyms")) entry.synonyms.push_back(s.get<std::string>());
        }
        if (it.value().contains("parents")) {
          for (const auto& s : it.value().at("parents")) entry.parents.push_back(s.get<std::string>());
        }
        spec.synonyms_table[normalize_object_name(it.key())] = std::move(entry);
      }
    }
  } catch (const json::exception& e) {
    throw fixture_error("fixture " + path + ": " + e.what());
  }

  // Cross-checks: referenced names must exist, geometry must be coherent.
  auto has_object = [&](const std::string& name) {
    for (const auto& o : spec.objects)
      if (normalize_object_name(o.name) == normalize_object_name(name)) return true;
    return false;
  };
  for (const auto& n : spec.press_order)
    if (!has_object(n)) throw fixture_error("press_order references unknown object: " + n);
  if (!spec.target_object.empty() && !has_object(spec.target_object))
    throw fixture_error("target references unknown object: " + spec.target_object);
  if (!spec.block_object.empty() && !has_object(spec.block_object))
    throw fixture_error("block references unknown object: " + spec.block_object);
  if (!spec.zone_object.empty() && !has_object(spec.zone_object))
    throw fixture_error("zone references unknown object: " + spec.zone_object);
  if (!spec.workspace.bounds.contains(spec.home.position))
    throw fixture_error("home position outside workspace");

  scene_snapshot probe;
  probe.bounds = spec.workspace.bounds;
  probe.objects = spec.objects;
  probe.validate();  // throws fixture_error on bad sizes / parents / cycles
  return spec;
}

simulator::simulator(task_spec spec) : spec_(std::move(spec)) {}

sim_state simulator::reset(std::uint64_t seed) const {
  sim_state s;
  s.seed = seed;
  s.ee = spec_.home;
  s.objects = spec_.objects;
  rng gen(derive_seed(seed, 0x706c6163656d6e74ull));  // placement stream
  for (auto& obj : s.objects) {
    for (int axis = 0; axis < 3; ++axis) {
      if (obj.jitter[axis] > 0.0) {
        obj.pose[axis] += gen.uniform(-obj.jitter[axis], obj.jitter[axis]);
      }
    }
  }
  for (const auto& name : spec_.press_order) s.pressed[name] = false;
  return s;
}

observation simulator::observe(const sim_state& s) const {
  auto snap = std::make_shared<scene_snapshot>();
  snap->bounds = spec_.workspace.bounds;
  snap->objects = s.objects;
  snap->pressed = s.pressed;
  snap->step = s.step_count;
  observation obs;
  obs.snapshot = std::move(snap);
  obs.step = s.step_count;
  return obs;
}

void simulator::step(sim_state& s, const robot_state& action) const {
  if (s.step_count >= spec_.workspace.timeout) throw episode_over_error();
  if (!action.finite()) throw error("non-finite action");

  const std::array<double, 3> prev = s.ee.position;
  std::array<double, 3> target = spec_.workspace.bounds.clamp(action.position);
  double d = position_distance(prev, target);
  std::array<double, 3> next = target;
  if (d > spec_.workspace.max_step) {
    double f = spec_.workspace.max_step / d;
    for (int i = 0; i < 3; ++i) next[i] = prev[i] + f * (target[i] - prev[i]);
  }
  s.ee.position = next;
  s.ee.orientation = action.orientation;
  s.ee.gripper = std::max(0.0, action.gripper);

  if (spec_.kind == task_kind::push_buttons_ordered) {
    for (auto& obj : s.objects) {
      auto it = s.pressed.find(obj.name);
      if (it == s.pressed.end() || it->second) continue;
      std::array<double, 3> top = obj.pose;
      top[2] += obj.size[0] / 2.0;  // size is [height, width, depth]
      if (position_distance(s.ee.position, top) <= spec_.press_radius && prev[2] > top[2]) {
        it->second = true;
        s.press_sequence.push_back(obj.name);
      }
    }
  } else if (spec_.kind == task_kind::slide_block_to_target) {
    for (auto& obj : s.objects) {
      if (normalize_object_name(obj.name) != normalize_object_name(spec_.block_object)) continue;
      double block_top = obj.pose[2] + obj.size[0] / 2.0;
      bool in_contact = xy_distance(s.ee.position, obj.pose) <= spec_.contact_radius &&
                        s.ee.position[2] <= block_top + 0.01;
      if (in_contact) {
        obj.pose[0] += s.ee.position[0] - prev[0];
        obj.pose[1] += s.ee.position[1] - prev[1];
        obj.pose[0] = std::clamp(obj.pose[0], spec_.workspace.bounds.x[0], spec_.workspace.bounds.x[1]);
        obj.pose[1] = std::clamp(obj.pose[1], spec_.workspace.bounds.y[0], spec_.workspace.bounds.y[1]);
      }
    }
  }
  ++s.step_count;
}

simulator::outcome simulator::check(const sim_state& s) const {
  outcome out;
  switch (spec_.kind) {
    case task_kind::push_buttons_ordered:
      out.success = s.press_sequence == spec_.press_order;
      break;
    case task_kind::reach_target: {
      const scene_object* target = nullptr;
      for (const auto& o : s.objects)
        if (normalize_object_name(o.name) == normalize_object_name(spec_.target_object)) target = &o;
      out.success = target != nullptr && position_distance(s.ee.position, target->pose) <= spec_.tolerance;
      break;
    }
    case task_kind::slide_block_to_target: {
      const scene_object* block = nullptr;
      const scene_object* zone = nullptr;
      for (const auto& o : s.objects) {
        if (normalize_object_name(o.name) == normalize_object_name(spec_.block_object)) block = &o;
        if (normalize_object_name(o.name) == normalize_object_name(spec_.zone_object)) zone = &o;
      }
      out.success = block != nullptr && zone != nullptr &&
                    xy_distance(block->pose, zone->pose) <= spec_.tolerance;
      break;
    }
  }
  if (out.success) {
    out.failure = failure_class::none;
  } else if (order_violated(s)) {
    out.failure = failure_class::behavior;
  } else if (s.step_count >= spec_.workspace.timeout) {
    out.failure = failure_class::timeout;
  } else {
    out.failure = failure_class::behavior;
  }
  return out;
}

bool simulator::order_violated(const sim_state& s) const {
  if (spec_.kind != task_kind::push_buttons_ordered) return false;
  if (s.press_sequence.size() > spec_.press_order.size()) return true;
  for (std::size_t i = 0; i < s.press_sequence.size(); ++i) {
    if (s.press_sequence[i] != spec_.press_order[i]) return true;
  }
  return false;
}

std::vector<double> simulator::frame_features(const sim_state& s) const {
  std::array<double, 7> ee = s.ee.to_array();
  std::vector<double> f(ee.begin(), ee.end());
  for (const auto& name : spec_.tracked_objects()) {
    for (const auto& o : s.objects) {
      if (normalize_object_name(o.name) == normalize_object_name(name)) {
        f.insert(f.end(), o.pose.begin(), o.pose.end());
        break;
      }
    }
  }
  for (const auto& name : spec_.press_order) {
    auto it = s.pressed.find(name);
    f.push_back(it != s.pressed.end() && it->second ? 1.0 : 0.0);
  }
  return f;
}

}  // namespace grappa
