#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

namespace grappa {

struct keyframe_config {
  int clusters = 6;    // k
  int components = 8;  // PCA dimensions kept (capped by data rank)
  std::uint64_t seed = 0;
  int max_iterations = 100;
  double tolerance = 1e-9;
};

// Picks representative frame indices from a trajectory: center the frames,
// project onto the top principal components, cluster with seeded k-means++,
// and return each cluster's member closest to its centroid (ties resolve to
// the earliest frame).  Output is sorted ascending and duplicate-free; with
// fewer frames than clusters every frame is returned.
std::vector<std::size_t> extract_keyframes(
    const std::vector<std::vector<double>>& frames,
    const keyframe_config& cfg = {});

}  // namespace grappa
