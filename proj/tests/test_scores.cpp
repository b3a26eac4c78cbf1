#include <doctest/doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "grappa/errors.hpp"
#include "grappa/scores.hpp"

using namespace grappa;

namespace {

// Reference sum at extended precision; exact for the magnitudes used here.
long double reference_sum(const score_vector& v) {
  long double acc = 0.0L;
  for (double x : v) acc += static_cast<long double>(x);
  return acc;
}

bool bitwise_equal(const score_vector& a, const score_vector& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::memcmp(&a[i], &b[i], sizeof(double)) != 0) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("exact_sum matches extended-precision reference") {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> dist(-1e6, 1e6);
  for (int trial = 0; trial < 200; ++trial) {
    score_vector v(17);
    for (double& x : v) x = dist(gen);
    long double want = reference_sum(v);
    CHECK(exact_sum(v) == doctest::Approx(static_cast<double>(want)).epsilon(1e-15));
  }
}

TEST_CASE("exact_sum is correctly rounded where naive summation is not") {
  // 1 + 2^-60 repeated: naive left-to-right accumulation drops every small
  // term, the compensated sum keeps them.
  score_vector v;
  v.push_back(1.0);
  for (int i = 0; i < 1024; ++i) v.push_back(0x1.0p-60);
  double naive = 0.0;
  for (double x : v) naive += x;
  CHECK(naive == 1.0);  // demonstrates the naive loss
  CHECK(exact_sum(v) == 1.0 + 1024 * 0x1.0p-60);
}

TEST_CASE("normalize_scores divides by the sum") {
  score_vector got = normalize_scores({2.0, 3.0, 5.0});
  REQUIRE(got.size() == 3);
  CHECK(got[0] == doctest::Approx(0.2));
  CHECK(got[1] == doctest::Approx(0.3));
  CHECK(got[2] == doctest::Approx(0.5));
  CHECK(exact_sum(got) == 1.0);
}

TEST_CASE("normalize_scores of a single entry is exactly one") {
  score_vector got = normalize_scores({7.0});
  REQUIRE(got.size() == 1);
  CHECK(got[0] == 1.0);
}

TEST_CASE("normalize_scores clamps negatives to zero") {
  score_vector got = normalize_scores({-1.0, 2.0, 2.0});
  REQUIRE(got.size() == 3);
  CHECK(got[0] == 0.0);
  CHECK(got[1] == doctest::Approx(0.5));
  CHECK(got[2] == doctest::Approx(0.5));
}

TEST_CASE("normalize_scores yields uniform on degenerate input") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  for (score_vector raw : {score_vector{0.0, 0.0, 0.0},
                           score_vector{nan, 1.0, 2.0},
                           score_vector{1.0, inf, 2.0},
                           score_vector{-3.0, -1.0, -2.0}}) {
    score_vector got = normalize_scores(raw);
    REQUIRE(got.size() == 3);
    for (double p : got) {
      // uniform entries may be within one ulp of 1/n
      CHECK(std::abs(p - 1.0 / 3.0) <= std::numeric_limits<double>::epsilon());
    }
    CHECK(exact_sum(got) == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("normalize_scores is a bit-exact fixed point") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> dist(0.0, 100.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::size_t n = 1 + gen() % 12;
    score_vector raw(n);
    for (double& x : raw) x = dist(gen);
    score_vector once = normalize_scores(raw);
    score_vector twice = normalize_scores(once);
    CHECK(bitwise_equal(once, twice));
    CHECK(exact_sum(once) == 1.0);
  }
}

TEST_CASE("normalize_scores rejects empty input") {
  CHECK_THROWS_AS(normalize_scores({}), empty_vector_error);
}

TEST_CASE("select_best picks the argmax") {
  CHECK(select_best({0.1, 0.7, 0.2}) == 1);
  CHECK(select_best({3.0}) == 0);
  CHECK(select_best({-2.0, -1.0, -3.0}) == 1);
}

TEST_CASE("select_best breaks ties toward the lowest index") {
  CHECK(select_best({0.5, 0.5, 0.2}) == 0);
  CHECK(select_best({0.2, 0.5, 0.5}) == 1);
  CHECK(select_best({1.0, 1.0, 1.0, 1.0}) == 0);
}

TEST_CASE("select_best rejects empty input") {
  CHECK_THROWS_AS(select_best({}), empty_vector_error);
}

TEST_CASE("select_best agrees with a linear scan oracle") {
  std::mt19937_64 gen(99);
  std::uniform_int_distribution<int> coarse(0, 9);  // forces frequent ties
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t n = 1 + gen() % 20;
    score_vector v(n);
    for (double& x : v) x = coarse(gen);
    std::size_t want = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (v[i] > v[want]) want = i;
    }
    CHECK(select_best(v) == want);
  }
}
