#include "grappa/scores.hpp"

#include <cmath>
#include <utility>
#include <vector>

#include "grappa/errors.hpp"

namespace grappa {

namespace {

bool all_finite(const double* xs, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(xs[i])) return false;
  }
  return true;
}

// Appends x to a list of non-overlapping partials (Shewchuk's grow-expansion).
void grow_partials(std::vector<double>& partials, double x) {
  std::size_t used = 0;
  for (double y : partials) {
    if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
    double hi = x + y;
    double lo = y - (hi - x);
    if (lo != 0.0) partials[used++] = lo;
    x = hi;
  }
  partials.resize(used);
  partials.push_back(x);
}

// Correctly rounded double from a list of non-overlapping partials,
// including the halfway correction that avoids double rounding.
double round_partials(const std::vector<double>& partials) {
  if (partials.empty()) return 0.0;
  std::size_t n = partials.size();
  double hi = partials[--n];
  double lo = 0.0;
  while (n > 0) {
    double x = hi;
    double y = partials[--n];
    hi = x + y;
    double yr = hi - x;
    lo = y - yr;
    if (lo != 0.0) break;
  }
  if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) ||
                (lo > 0.0 && partials[n - 1] > 0.0))) {
    double y = lo * 2.0;
    double x = hi + y;
    double yr = x - hi;
    if (y == yr) hi = x;
  }
  return hi;
}

// Divides weights by their sum and then rewrites the largest entry with the
// exact residual 1 - sum(others).  The output sums to exactly 1.0 under
// exact_sum, which is what makes normalization idempotent.
score_vector build_probability_vector(const score_vector& weights, double sum) {
  std::size_t j = 0;
  for (std::size_t i = 1; i < weights.size(); ++i) {
    if (weights[i] > weights[j]) j = i;
  }
  score_vector out(weights.size());
  std::vector<double> partials;
  grow_partials(partials, -1.0);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (i == j) continue;
    out[i] = weights[i] / sum;
    grow_partials(partials, out[i]);
  }
  double residual = -round_partials(partials);
  out[j] = residual < 0.0 ? 0.0 : residual;
  return out;
}

}  // namespace

double exact_sum(const double* values, std::size_t n) {
  if (!all_finite(values, n)) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += values[i];
    return s;
  }
  std::vector<double> partials;
  for (std::size_t i = 0; i < n; ++i) grow_partials(partials, values[i]);
  return round_partials(partials);
}

double exact_sum(const score_vector& values) {
  return exact_sum(values.data(), values.size());
}

score_vector normalize_scores(const score_vector& raw) {
  if (raw.empty()) throw empty_vector_error();

  if (!all_finite(raw.data(), raw.size())) {
    return build_probability_vector(score_vector(raw.size(), 1.0),
                                    static_cast<double>(raw.size()));
  }

  score_vector clamped = raw;
  for (double& x : clamped) {
    if (x < 0.0) x = 0.0;
  }

  double sum = exact_sum(clamped);
  if (sum == 1.0) return clamped;  // already a probability vector
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    return build_probability_vector(score_vector(raw.size(), 1.0),
                                    static_cast<double>(raw.size()));
  }
  return build_probability_vector(clamped, sum);
}

std::size_t select_best(const score_vector& scores) {
  if (scores.empty()) throw empty_vector_error();
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

}  // namespace grappa
