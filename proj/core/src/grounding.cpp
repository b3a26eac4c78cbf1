#include "grappa/grounding.hpp"

#include <algorithm>
#include <cctype>

#include "grappa/errors.hpp"

namespace grappa {

double scene_object::min_dimension() const {
  return std::min({size[0], size[1], size[2]});
}

const scene_object* scene_snapshot::find_id(const std::string& id) const {
  for (const auto& obj : objects) {
    if (obj.id == id) return &obj;
  }
  return nullptr;
}

const scene_object* scene_snapshot::find_name(const std::string& name) const {
  std::string wanted = normalize_object_name(name);
  for (const auto& obj : objects) {
    if (normalize_object_name(obj.name) == wanted) return &obj;
    for (const auto& syn : obj.synonyms) {
      if (normalize_object_name(syn) == wanted) return &obj;
    }
  }
  return nullptr;
}

bool scene_snapshot::is_descendant(const std::string& id,
                                   const std::string& ancestor_id) const {
  const scene_object* obj = find_id(id);
  std::size_t hops = 0;
  while (obj != nullptr && !obj->parent.empty() && hops++ < objects.size()) {
    if (obj->parent == ancestor_id) return true;
    obj = find_id(obj->parent);
  }
  return false;
}

void scene_snapshot::validate() const {
  for (const auto& obj : objects) {
    if (obj.size[0] <= 0.0 || obj.size[1] <= 0.0 || obj.size[2] <= 0.0) {
      throw fixture_error("object '" + obj.id + "' has a non-positive size");
    }
    if (!obj.parent.empty()) {
      const scene_object* parent = find_id(obj.parent);
      if (parent == nullptr) {
        throw fixture_error("object '" + obj.id + "' references missing parent '" +
                            obj.parent + "'");
      }
      for (int axis = 0; axis < 3; ++axis) {
        // size is (height, width, depth) against (z, x, y) extents
        static constexpr int size_index_for_axis[3] = {1, 2, 0};
        double half = parent->size[size_index_for_axis[axis]] / 2.0;
        if (obj.pose[axis] < parent->pose[axis] - half ||
            obj.pose[axis] > parent->pose[axis] + half) {
          throw fixture_error("object '" + obj.id +
                              "' lies outside its parent's bounding box");
        }
      }
    }
  }
  // acyclic parent chains: walking up must terminate
  for (const auto& obj : objects) {
    const scene_object* cur = &obj;
    std::size_t hops = 0;
    while (!cur->parent.empty()) {
      if (++hops > objects.size()) {
        throw fixture_error("cycle in parent chain at object '" + obj.id + "'");
      }
      cur = find_id(cur->parent);
      if (cur == nullptr) break;
    }
  }
}

std::string normalize_object_name(const std::string& name) {
  std::string out;
  out.reserve(name.size());
  bool pending_space = false;
  for (char raw : name) {
    unsigned char c = static_cast<unsigned char>(raw);
    if (std::isspace(c) || raw == '_') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

void track_registry::add(const std::string& name, const std::string& id) {
  entries_[normalize_object_name(name)] = entry{id, false};
}

bool track_registry::registered(const std::string& name) const {
  return entries_.count(normalize_object_name(name)) > 0;
}

bool track_registry::tracked(const std::string& name) const {
  auto it = entries_.find(normalize_object_name(name));
  return it != entries_.end() && !it->second.lost;
}

const std::string& track_registry::id_for(const std::string& name) const {
  auto it = entries_.find(normalize_object_name(name));
  if (it == entries_.end()) throw not_tracked_error(name);
  if (it->second.lost) throw perception_lost_error(name);
  return it->second.id;
}

void track_registry::mark_lost(const std::string& name) {
  auto it = entries_.find(normalize_object_name(name));
  if (it != entries_.end()) it->second.lost = true;
}

void track_registry::advance_step(double rate, rng& r) {
  if (rate <= 0.0) return;
  for (auto& [name, e] : entries_) {
    if (!e.lost && r.uniform01() < rate) e.lost = true;
  }
}

std::vector<std::string> track_registry::tracked_names() const {
  std::vector<std::string> names;
  for (const auto& [name, e] : entries_) {
    if (!e.lost) names.push_back(name);
  }
  return names;
}

void track_registry::clear() { entries_.clear(); }

bool detector::in_the_image(const scene_snapshot& scene, const std::string& name,
                            const std::optional<std::string>& parent,
                            const track_registry& tracks) {
  const scene_object* crop = nullptr;
  if (parent.has_value()) {
    if (!tracks.tracked(*parent)) throw unknown_parent_error(*parent);
    crop = scene.find_id(tracks.id_for(*parent));
    if (crop == nullptr) throw unknown_parent_error(*parent);
  }

  const scene_object* match = scene.find_name(name);
  bool verdict = false;
  if (match != nullptr) {
    bool in_crop = crop == nullptr || scene.is_descendant(match->id, crop->id);
    if (in_crop) {
      double apparent = match->min_dimension();
      if (crop != nullptr) apparent *= cfg_.crop_boost;
      verdict = apparent >= cfg_.min_apparent_size;
      if (verdict && cfg_.false_negative_rate > 0.0 &&
          coin_.uniform01() < cfg_.false_negative_rate) {
        verdict = false;
      }
    }
    if (!verdict && match->distractor && cfg_.false_positive_rate > 0.0 &&
        coin_.uniform01() < cfg_.false_positive_rate) {
      verdict = true;
    }
  }
  return verdict;
}

namespace {

void register_found(track_registry& tracks, const scene_snapshot& scene,
                    const std::string& queried, const std::string& requested) {
  const scene_object* obj = scene.find_name(queried);
  if (obj == nullptr) return;
  tracks.add(queried, obj->id);
  tracks.add(requested, obj->id);
  tracks.add(obj->name, obj->id);
}

search_trace search_impl(detector& det, track_registry& tracks,
                         const scene_snapshot& scene, const std::string& target,
                         const std::vector<std::string>& synonyms,
                         const std::vector<std::string>& parents,
                         const search_config& cfg, int depth_remaining,
                         const std::optional<std::string>& crop,
                         std::vector<search_query>& queries) {
  search_trace trace;
  if (depth_remaining <= 0) return trace;

  auto query = [&](const std::string& name) {
    bool verdict = det.in_the_image(scene, name, crop, tracks);
    queries.push_back({name, crop, verdict});
    return verdict;
  };

  if (query(target)) {
    register_found(tracks, scene, target, target);
    trace.found = true;
    trace.path = {target};
    trace.depth_used = 1;
    return trace;
  }

  int syn_budget = cfg.max_synonyms;
  for (const auto& syn : synonyms) {
    if (syn_budget-- <= 0) break;
    if (query(syn)) {
      register_found(tracks, scene, syn, target);
      trace.found = true;
      trace.path = {syn};
      trace.depth_used = 1;
      return trace;
    }
  }

  int parent_budget = cfg.max_parents;
  for (const auto& parent : parents) {
    if (parent_budget-- <= 0) break;
    if (query(parent)) {
      register_found(tracks, scene, parent, parent);
      if (depth_remaining > 1) {
        search_trace inner =
            search_impl(det, tracks, scene, target, synonyms, parents, cfg,
                        depth_remaining - 1, parent, queries);
        if (inner.found) {
          trace.found = true;
          trace.path.push_back(parent);
          trace.path.insert(trace.path.end(), inner.path.begin(),
                            inner.path.end());
          trace.depth_used = 1 + inner.depth_used;
          return trace;
        }
      }
    }
  }
  return trace;
}

}  // namespace

search_trace multi_granular_search(detector& det, track_registry& tracks,
                                   const scene_snapshot& scene,
                                   const std::string& target,
                                   const std::vector<std::string>& synonyms,
                                   const std::vector<std::string>& parents,
                                   const search_config& cfg) {
  std::vector<search_query> queries;
  search_trace trace = search_impl(det, tracks, scene, target, synonyms,
                                   parents, cfg, cfg.depth_budget, std::nullopt,
                                   queries);
  trace.queries = std::move(queries);
  return trace;
}

std::array<double, 3> query_object_geometry(const track_registry& tracks,
                                            const scene_snapshot& scene,
                                            const std::string& name,
                                            geometry_kind kind) {
  const std::string& id = tracks.id_for(name);  // throws when unknown or lost
  const scene_object* obj = scene.find_id(id);
  if (obj == nullptr) throw perception_lost_error(name);
  switch (kind) {
    case geometry_kind::position: return obj->pose;
    case geometry_kind::size: return obj->size;
    case geometry_kind::orientation: return obj->orientation;
  }
  return obj->pose;
}

}  // namespace grappa
