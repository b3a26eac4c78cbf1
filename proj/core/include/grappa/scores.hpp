#pragma once

#include <cstddef>

#include "grappa/types.hpp"

namespace grappa {

// Correctly rounded sum of doubles (Shewchuk partials), so that repeated
// normalization is a bit-exact fixed point.
double exact_sum(const double* values, std::size_t n);
double exact_sum(const score_vector& values);

// Turns raw scores into a probability vector:
//   - negative entries clamp to zero,
//   - any non-finite entry or an all-zero sum yields the uniform vector,
//   - otherwise entries divide by their sum.
// The result always sums to exactly 1.0 under exact_sum, which makes
// normalize_scores(normalize_scores(v)) == normalize_scores(v) bit-exact.
// Throws empty_vector_error on empty input.
score_vector normalize_scores(const score_vector& raw);

// Index of the largest entry; ties resolve to the lowest index.
// Throws empty_vector_error on empty input.
std::size_t select_best(const score_vector& scores);

}  // namespace grappa
