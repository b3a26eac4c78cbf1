#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grappa/agents/conversation.hpp"
#include "grappa/agents/monitor.hpp"
#include "grappa/executor.hpp"
#include "grappa/policy.hpp"
#include "grappa/sim.hpp"

namespace grappa {

struct improve_config {
  int iterations = 5;
  std::vector<std::uint64_t> seeds;  // evaluation seeds per iteration
  conversation_config conversation;
  keyframe_config keyframes;
};

struct iteration_record {
  int iteration = 0;
  std::string guidance_source;
  std::string guidance_version;
  double success_rate = 0.0;
  std::vector<episode_log> episodes;
  std::string feedback;  // monitor critique fed into the next iteration
  conversation_artifacts artifacts;
};

struct improve_result {
  std::vector<iteration_record> iterations;
  std::string best_source;
  int best_iteration = -1;
  double best_rate = 0.0;
};

// Generate -> evaluate -> critique loop.  Each iteration asks the agent team
// for a guidance script (with all prior monitor feedback spliced in as user
// turns), evaluates it across the seeds, and stops early once every episode
// succeeds.  The best-scoring script wins; later iterations win ties.
improve_result improve_guidance(simulator& sim,
                                const policy_interface& policy,
                                const guidance_context& ctx_template,
                                chat_backend& backend,
                                const agent_prompts& prompts,
                                const improve_config& cfg);

}  // namespace grappa
