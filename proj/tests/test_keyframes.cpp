#include <doctest/doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "grappa/errors.hpp"
#include "grappa/keyframes.hpp"
#include "grappa/rng.hpp"

using namespace grappa;

namespace {

using frame_set = std::vector<std::vector<double>>;

// Three well-separated plateaus of `per` frames each, optionally jittered.
frame_set plateau_frames(std::size_t per, double jitter, std::uint64_t seed) {
  const std::vector<std::vector<double>> centers = {
      {0.0, 0.0, 0.0, 0.0},
      {5.0, -5.0, 5.0, 0.0},
      {-5.0, 5.0, 10.0, 5.0},
  };
  rng gen(seed);
  frame_set frames;
  for (const auto& c : centers) {
    for (std::size_t i = 0; i < per; ++i) {
      std::vector<double> f = c;
      if (jitter > 0.0) {
        for (double& v : f) v += jitter * (2.0 * gen.uniform01() - 1.0);
      }
      frames.push_back(std::move(f));
    }
  }
  return frames;
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

// Independent reference: the frame closest to the arithmetic mean of all
// frames, earliest on ties.  With one cluster this is the whole story.
std::size_t nearest_to_mean(const frame_set& frames) {
  const std::size_t d = frames[0].size();
  std::vector<double> mean(d, 0.0);
  for (const auto& f : frames) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += f[j];
  }
  for (double& m : mean) m /= static_cast<double>(frames.size());
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    double d2 = sq_dist(frames[i], mean);
    if (d2 < best_d) {
      best_d = d2;
      best = i;
    }
  }
  return best;
}

// Exhaustive k-means: try every assignment of T frames to k labels, score by
// within-cluster squared error about the cluster means, keep the global
// minimum, and report each non-empty cluster's member nearest its mean.
std::vector<std::size_t> brute_force_reps(const frame_set& frames, int k) {
  const std::size_t t = frames.size();
  const std::size_t d = frames[0].size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < t; ++i) total *= static_cast<std::size_t>(k);

  double best_sse = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_reps;
  std::vector<int> labels(t, 0);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t rem = code;
    for (std::size_t i = 0; i < t; ++i) {
      labels[i] = static_cast<int>(rem % static_cast<std::size_t>(k));
      rem /= static_cast<std::size_t>(k);
    }

    std::vector<std::vector<double>> means(
        static_cast<std::size_t>(k), std::vector<double>(d, 0.0));
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < t; ++i) {
      auto c = static_cast<std::size_t>(labels[i]);
      for (std::size_t j = 0; j < d; ++j) means[c][j] += frames[i][j];
      ++counts[c];
    }
    for (std::size_t c = 0; c < means.size(); ++c) {
      if (counts[c] == 0) continue;
      for (double& m : means[c]) m /= static_cast<double>(counts[c]);
    }

    double sse = 0.0;
    for (std::size_t i = 0; i < t; ++i) {
      sse += sq_dist(frames[i], means[static_cast<std::size_t>(labels[i])]);
    }
    if (sse >= best_sse) continue;

    best_sse = sse;
    best_reps.clear();
    for (std::size_t c = 0; c < means.size(); ++c) {
      if (counts[c] == 0) continue;
      std::size_t rep = t;
      double rep_d = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < t; ++i) {
        if (static_cast<std::size_t>(labels[i]) != c) continue;
        double d2 = sq_dist(frames[i], means[c]);
        if (d2 < rep_d) {
          rep_d = d2;
          rep = i;
        }
      }
      best_reps.push_back(rep);
    }
    std::sort(best_reps.begin(), best_reps.end());
  }
  return best_reps;
}

}  // namespace

TEST_CASE("short trajectories come back whole") {
  CHECK(extract_keyframes({}).empty());

  frame_set four = plateau_frames(2, 0.0, 1);
  four.resize(4);
  keyframe_config cfg;  // default k = 6 > 4 frames
  CHECK(extract_keyframes(four, cfg) ==
        std::vector<std::size_t>{0, 1, 2, 3});

  cfg.clusters = 4;  // k == T behaves the same
  CHECK(extract_keyframes(four, cfg) ==
        std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("malformed trajectories are rejected") {
  frame_set ok = plateau_frames(3, 0.0, 1);
  keyframe_config cfg;
  cfg.clusters = 0;
  CHECK_THROWS_AS(extract_keyframes(ok, cfg), config_error);

  frame_set ragged = ok;
  ragged[2].push_back(1.0);
  CHECK_THROWS_AS(extract_keyframes(ragged), length_mismatch_error);

  frame_set hollow = {{}};
  CHECK_THROWS_AS(extract_keyframes(hollow), error);

  frame_set poisoned = ok;
  poisoned[1][0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(extract_keyframes(poisoned), error);
}

TEST_CASE("three exact plateaus give the first frame of each, any seed") {
  frame_set frames = plateau_frames(10, 0.0, 0);  // 30 frames, 3 values
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    keyframe_config cfg;
    cfg.clusters = 3;
    cfg.seed = seed;
    // within a plateau every frame ties at its centroid, so the earliest wins
    CHECK(extract_keyframes(frames, cfg) ==
          std::vector<std::size_t>{0, 10, 20});
  }
}

TEST_CASE("jittered plateaus still yield one keyframe per plateau") {
  for (std::uint64_t data_seed = 0; data_seed < 5; ++data_seed) {
    frame_set frames = plateau_frames(10, 0.05, data_seed);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      keyframe_config cfg;
      cfg.clusters = 3;
      cfg.seed = seed;
      auto picks = extract_keyframes(frames, cfg);
      REQUIRE(picks.size() == 3);
      CHECK(picks[0] < 10);
      CHECK(picks[1] >= 10);
      CHECK(picks[1] < 20);
      CHECK(picks[2] >= 20);
    }
  }
}

TEST_CASE("a single cluster picks the frame nearest the trajectory mean") {
  rng gen(404);
  for (int trial = 0; trial < 50; ++trial) {
    frame_set frames;
    for (int i = 0; i < 12; ++i) {
      frames.push_back({gen.uniform01() * 4.0, gen.uniform01() * 4.0,
                        gen.uniform01() * 4.0});
    }
    keyframe_config cfg;
    cfg.clusters = 1;
    cfg.seed = static_cast<std::uint64_t>(trial);
    auto picks = extract_keyframes(frames, cfg);
    REQUIRE(picks.size() == 1);
    CHECK(picks[0] == nearest_to_mean(frames));
  }
}

TEST_CASE("small instances match an exhaustive k-means oracle") {
  for (std::size_t per : {3u, 4u}) {  // T = 9 and T = 12
    for (std::uint64_t data_seed = 10; data_seed < 14; ++data_seed) {
      frame_set frames = plateau_frames(per, 0.3, data_seed);
      auto oracle = brute_force_reps(frames, 3);
      for (std::uint64_t seed : {0ull, 7ull, 123ull}) {
        keyframe_config cfg;
        cfg.clusters = 3;
        cfg.seed = seed;
        CHECK(extract_keyframes(frames, cfg) == oracle);
      }
    }
  }
}

TEST_CASE("extraction is deterministic per seed") {
  rng gen(77);
  frame_set frames;
  for (int i = 0; i < 40; ++i) {
    std::vector<double> f;
    for (int j = 0; j < 6; ++j) f.push_back(gen.normal());
    frames.push_back(std::move(f));
  }
  keyframe_config cfg;
  cfg.clusters = 5;
  cfg.seed = 9;
  auto first = extract_keyframes(frames, cfg);
  auto second = extract_keyframes(frames, cfg);
  CHECK(first == second);

  // the output is a valid index selection regardless of seed
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    cfg.seed = seed;
    auto picks = extract_keyframes(frames, cfg);
    REQUIRE(!picks.empty());
    CHECK(picks.size() <= 5);
    CHECK(std::is_sorted(picks.begin(), picks.end()));
    CHECK(std::adjacent_find(picks.begin(), picks.end()) == picks.end());
    CHECK(picks.back() < frames.size());
  }
}

TEST_CASE("permuting feature coordinates does not change the selection") {
  frame_set frames = plateau_frames(8, 0.05, 3);
  frame_set permuted;
  for (const auto& f : frames) {
    permuted.push_back({f[2], f[0], f[3], f[1]});
  }
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    keyframe_config cfg;
    cfg.clusters = 3;
    cfg.seed = seed;
    CHECK(extract_keyframes(frames, cfg) == extract_keyframes(permuted, cfg));
  }
}
