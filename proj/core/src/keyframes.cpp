#include "grappa/keyframes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "grappa/errors.hpp"
#include "grappa/rng.hpp"

namespace grappa {
namespace {

double sq_distance(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
  return (a - b).squaredNorm();
}

// Weighted pick proportional to per-point squared distances, by scanning the
// cumulative sum at a uniform draw.  Falls back to index 0 if all weights
// vanish (duplicate points).
std::size_t pick_weighted(const std::vector<double>& weights, rng& gen) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) return 0;
  double r = gen.uniform01() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (r < acc) return i;
  }
  return weights.size() - 1;
}

}  // namespace

std::vector<std::size_t> extract_keyframes(
    const std::vector<std::vector<double>>& frames,
    const keyframe_config& cfg) {
  const std::size_t t = frames.size();
  if (t == 0) return {};
  const std::size_t d = frames[0].size();
  if (d == 0) throw error("keyframes: frames must be non-empty vectors");
  for (const auto& f : frames) {
    if (f.size() != d) throw length_mismatch_error(f.size(), d);
    for (double v : f) {
      if (!std::isfinite(v)) throw error("keyframes: non-finite frame value");
    }
  }
  if (cfg.clusters <= 0) throw config_error("keyframes: clusters must be positive");

  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(cfg.clusters), t);
  if (k == t) {
    std::vector<std::size_t> all(t);
    for (std::size_t i = 0; i < t; ++i) all[i] = i;
    return all;
  }

  Eigen::MatrixXd x(t, d);
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t j = 0; j < d; ++j) x(i, j) = frames[i][j];
  }
  Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;

  // PCA via the d x d scatter spectrum; keep the strongest directions.
  const std::size_t p = std::min<std::size_t>(
      {static_cast<std::size_t>(std::max(cfg.components, 1)), d, t});
  Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(t);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  // Eigenvalues come back ascending; take the trailing p columns.
  Eigen::MatrixXd basis = eig.eigenvectors().rightCols(static_cast<Eigen::Index>(p));
  Eigen::MatrixXd proj = x * basis;  // t x p

  // k-means++ seeding over the projected frames.
  rng gen(derive_seed(cfg.seed, 0x6b65796672616d65ull));
  std::vector<Eigen::RowVectorXd> centroids;
  centroids.reserve(k);
  centroids.push_back(proj.row(static_cast<Eigen::Index>(gen.uniform_index(t))));
  std::vector<double> dist2(t, 0.0);
  while (centroids.size() < k) {
    for (std::size_t i = 0; i < t; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centroids) {
        best = std::min(best, sq_distance(proj.row(static_cast<Eigen::Index>(i)), c));
      }
      dist2[i] = best;
    }
    centroids.push_back(proj.row(static_cast<Eigen::Index>(pick_weighted(dist2, gen))));
  }

  // Lloyd iterations with empty-cluster repair.
  std::vector<std::size_t> assign(t, 0);
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    for (std::size_t i = 0; i < t; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_c = 0;
      for (std::size_t c = 0; c < k; ++c) {
        double d2 = sq_distance(proj.row(static_cast<Eigen::Index>(i)), centroids[c]);
        if (d2 < best) {
          best = d2;
          best_c = c;
        }
      }
      assign[i] = best_c;
    }

    std::vector<Eigen::RowVectorXd> sums(k, Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(p)));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < t; ++i) {
      sums[assign[i]] += proj.row(static_cast<Eigen::Index>(i));
      ++counts[assign[i]];
    }

    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      Eigen::RowVectorXd next;
      if (counts[c] == 0) {
        // Re-seed an empty cluster at the point farthest from its centroid.
        double far_best = -1.0;
        std::size_t far_i = 0;
        for (std::size_t i = 0; i < t; ++i) {
          double d2 = sq_distance(proj.row(static_cast<Eigen::Index>(i)),
                                  centroids[assign[i]]);
          if (d2 > far_best) {
            far_best = d2;
            far_i = i;
          }
        }
        next = proj.row(static_cast<Eigen::Index>(far_i));
      } else {
        next = sums[c] / static_cast<double>(counts[c]);
      }
      shift = std::max(shift, std::sqrt(sq_distance(next, centroids[c])));
      centroids[c] = next;
    }
    if (shift <= cfg.tolerance) break;
  }

  // Final assignment, then one representative per non-empty cluster.
  for (std::size_t i = 0; i < t; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_c = 0;
    for (std::size_t c = 0; c < k; ++c) {
      double d2 = sq_distance(proj.row(static_cast<Eigen::Index>(i)), centroids[c]);
      if (d2 < best) {
        best = d2;
        best_c = c;
      }
    }
    assign[i] = best_c;
  }

  std::vector<std::size_t> reps;
  for (std::size_t c = 0; c < k; ++c) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_i = t;
    for (std::size_t i = 0; i < t; ++i) {
      if (assign[i] != c) continue;
      double d2 = sq_distance(proj.row(static_cast<Eigen::Index>(i)), centroids[c]);
      if (d2 < best) {  // strict: ties keep the earliest frame
        best = d2;
        best_i = i;
      }
    }
    if (best_i < t) reps.push_back(best_i);
  }
  std::sort(reps.begin(), reps.end());
  reps.erase(std::unique(reps.begin(), reps.end()), reps.end());
  return reps;
}

}  // namespace grappa
