#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "grappa/rng.hpp"
#include "grappa/types.hpp"

namespace grappa {

struct scene_object {
  std::string id;  // unique within a snapshot
  std::string name;
  std::vector<std::string> synonyms;
  std::array<double, 3> pose{0.0, 0.0, 0.0};  // center position, meters
  std::array<double, 3> size{0.0, 0.0, 0.0};  // height, width, depth
  std::array<double, 3> orientation{0.0, 0.0, 0.0};
  std::string color;
  std::string parent;  // id of the enclosing object, empty for top level
  bool distractor = false;
  std::array<double, 3> jitter{0.0, 0.0, 0.0};  // placement jitter half-range

  double min_dimension() const;
};

// Immutable scene view for one step.  `pressed` carries button states so the
// simulator can expose task progress to feature vectors and scripted experts.
struct scene_snapshot {
  workspace_bounds bounds;
  std::vector<scene_object> objects;
  std::map<std::string, bool> pressed;
  int step = 0;

  const scene_object* find_id(const std::string& id) const;
  const scene_object* find_name(const std::string& name) const;
  bool is_descendant(const std::string& id, const std::string& ancestor_id) const;

  // Sizes positive, parent ids resolvable and acyclic, children inside the
  // parent's bounding box.  Throws fixture_error on violation.
  void validate() const;
};

// Lowercase, underscores to spaces, runs of whitespace collapsed, trimmed.
std::string normalize_object_name(const std::string& name);

struct detector_config {
  double min_apparent_size = 0.03;  // meters
  double crop_boost = 2.0;          // apparent-size gain inside a crop, >= 1
  double false_negative_rate = 0.0;
  double false_positive_rate = 0.0;
  std::uint64_t seed = 0;
};

// Name -> tracked scene id, with per-step dropout.  A lost track stays lost
// until the object is re-found through a search.
class track_registry {
 public:
  void add(const std::string& name, const std::string& id);
  bool registered(const std::string& name) const;
  bool tracked(const std::string& name) const;  // registered and not lost
  // Throws not_tracked_error / perception_lost_error.
  const std::string& id_for(const std::string& name) const;
  void mark_lost(const std::string& name);
  // Each tracked entry independently flips to lost with probability `rate`.
  void advance_step(double rate, rng& r);
  std::vector<std::string> tracked_names() const;
  void clear();

 private:
  struct entry {
    std::string id;
    bool lost = false;
  };
  std::map<std::string, entry> entries_;  // keys are normalized names
};

// Mock open-vocabulary detector over ground-truth geometry: an object is
// "in the image" when a name or synonym matches and its apparent size clears
// the detection threshold.  Cropping to a parent boosts apparent size.
class detector {
 public:
  explicit detector(detector_config cfg) : cfg_(cfg), coin_(cfg.seed) {}

  // `parent`, when set, must be a currently tracked name (unknown_parent_error
  // otherwise) and restricts the query to that object's crop.
  bool in_the_image(const scene_snapshot& scene, const std::string& name,
                    const std::optional<std::string>& parent,
                    const track_registry& tracks);

  const detector_config& config() const { return cfg_; }

 private:
  detector_config cfg_;
  rng coin_;
};

struct search_query {
  std::string object;
  std::optional<std::string> parent;
  bool verdict = false;
};

struct search_trace {
  bool found = false;
  std::vector<std::string> path;  // outermost parent ... matched name
  int depth_used = 0;
  std::vector<search_query> queries;
};

struct search_config {
  int depth_budget = 3;
  int max_synonyms = 3;
  int max_parents = 3;
};

// Coarse-to-fine lookup: try the target, then synonyms, then each parent
// candidate; when a parent is visible, recurse into its crop with one less
// level of depth.  The first success registers the found object (and the
// parent chain walked to reach it) in `tracks`.
search_trace multi_granular_search(detector& det, track_registry& tracks,
                                   const scene_snapshot& scene,
                                   const std::string& target,
                                   const std::vector<std::string>& synonyms,
                                   const std::vector<std::string>& parents,
                                   const search_config& cfg = {});

// Ground-truth geometry for a tracked object.  Throws not_tracked_error if
// the name was never registered, perception_lost_error if its track dropped.
std::array<double, 3> query_object_geometry(const track_registry& tracks,
                                            const scene_snapshot& scene,
                                            const std::string& name,
                                            geometry_kind kind);

struct thesaurus_entry {
  std::vector<std::string> synonyms;
  std::vector<std::string> parents;
};

// Static synonym/parent table used when no live backend proposes names.
using thesaurus = std::map<std::string, thesaurus_entry>;

}  // namespace grappa
