#pragma once

#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "grappa/episode_log.hpp"
#include "grappa/grounding.hpp"
#include "grappa/gsl/interp.hpp"
#include "grappa/policy.hpp"
#include "grappa/sim.hpp"
#include "grappa/types.hpp"

namespace grappa {

// What a guided step does when guidance cannot be evaluated (perception lost
// or budget exhausted): fall back to the base distribution alone, or blend
// with a uniform guidance vector.
enum class fallback_mode { base_only, uniform_guidance };

struct guidance_context {
  std::shared_ptr<const gsl::program> program;  // null = base policy only
  double alpha = 0.0;                           // guidance weight in [0, 1]
  int samples = 16;                             // candidates per step
  dynamics_model dynamics;
  gsl::eval_budget budget;
  fallback_mode fallback = fallback_mode::base_only;
  detector_config detector;
  search_config search;
  double dropout_rate = 0.0;  // per-step chance a tracked object is lost
  log_detail detail = log_detail::scores;
  std::string guidance_label;  // goes into the episode's guidance version
};

// Per-candidate blend of normalized base and guidance scores:
// (1 - alpha) * base + alpha * guidance.  Throws length_mismatch_error when
// sizes differ and config_error when alpha is outside [0, 1].
score_vector combine_distributions(const score_vector& base_probs,
                                   const score_vector& guidance_probs,
                                   double alpha);

struct guided_step_result {
  step_trace trace;
  hidden_state next_hidden;
};

// One decision: sample candidates, score under the base policy, forecast
// each candidate, score forecasts under guidance, blend, pick the argmax.
// Guidance failures flip the trace's fallback flag instead of aborting.
guided_step_result guided_step(const policy_interface& policy,
                               const observation& obs,
                               const robot_state& state,
                               const hidden_state& hidden,
                               const guidance_context& ctx,
                               const gsl::perception_fn& perception,
                               std::uint64_t step_seed);

// Runs one full episode: grounds the objects the script references, then
// loops guided steps until success, an unrecoverable press-order violation,
// or timeout.  The hidden state is re-evaluated at the realized state when
// it deviates from the chosen candidate's forecast.
episode_log run_episode(const simulator& sim,
                        const policy_interface& policy,
                        const guidance_context& ctx,
                        std::uint64_t seed);

// Re-applies a log's actions through the simulator and returns the final
// end-effector state (for drift checks against log.final_state).
robot_state replay_episode(const simulator& sim, const episode_log& log);

struct heatmap_grid {
  double x0 = 0.0, x1 = 1.0;
  double y0 = 0.0, y1 = 1.0;
  int nx = 32, ny = 32;
  double z = 0.0;  // slice height
};

struct heatmap_result {
  heatmap_grid grid;
  std::vector<double> base;      // ny * nx, row-major by y then x
  std::vector<double> guidance;  // empty without a program
  std::vector<double> combined;
  int argmax_ix = 0;
  int argmax_iy = 0;
  std::array<double, 2> argmax_xy() const;
};

// Scores a grid of candidate positions (orientation/gripper held at `state`)
// through the same blend as guided_step.
heatmap_result compute_heatmap(const policy_interface& policy,
                               const observation& obs,
                               const robot_state& state,
                               const hidden_state& hidden,
                               const guidance_context& ctx,
                               const gsl::perception_fn& perception,
                               const heatmap_grid& grid);

void write_heatmap_csv(const heatmap_result& result, std::ostream& out);

// Walks a parsed script and returns the object names it queries with
// constant arguments, in first-appearance order without duplicates.
std::vector<std::string> collect_object_names(const gsl::program& prog);

}  // namespace grappa
