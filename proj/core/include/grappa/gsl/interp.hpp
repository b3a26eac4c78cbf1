#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "grappa/gsl/ast.hpp"
#include "grappa/gsl/value.hpp"
#include "grappa/types.hpp"

namespace grappa::gsl {

struct eval_budget {
  std::size_t max_ops = 100000;
  std::size_t max_loop_iters = 10000;
};

struct perception_call {
  std::string builtin;
  std::string object;
};

// Resolves a perception builtin against the live scene.  Expected to throw
// perception_lost_error when the object cannot be resolved.
using perception_fn =
    std::function<std::array<double, 3>(geometry_kind, const std::string&)>;

struct eval_outcome {
  double score = 0.0;
  hidden_state next_hidden;
  std::vector<perception_call> perception_calls;
  std::size_t ops_used = 0;
};

// Runs the program's `guidance(state, prev)` entry on one candidate state.
// The input hidden map is copied, never mutated.  Throws:
//   eval_error            on type errors, non-finite arithmetic, bad returns
//   budget_exceeded_error when max_ops or max_loop_iters is exhausted
//   perception_lost_error propagated from the perception binding
eval_outcome evaluate(const program& prog, const robot_state& state,
                      const hidden_state& hidden,
                      const perception_fn& perception,
                      const eval_budget& budget = {});

// Fixed perception stub for dry runs: position/orientation resolve to zeros,
// size to 0.1 per axis; never fails.
perception_fn stub_perception();

}  // namespace grappa::gsl
