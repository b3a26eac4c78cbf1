#pragma once

#include <string>

#include "grappa/agents/backend.hpp"
#include "grappa/agents/conversation.hpp"
#include "grappa/episode_log.hpp"
#include "grappa/keyframes.hpp"

namespace grappa {

// Per-step feature rows for keyframe extraction: the end-effector array plus
// the episode's hidden-state values (union of keys, sorted, missing = 0,
// booleans as 0/1).
std::vector<std::vector<double>> episode_feature_rows(const episode_log& log);

// Deterministic text rendition of the episode reduced to its keyframes.
std::string keyframe_summary(const episode_log& log, const keyframe_config& cfg = {});

// Asks the monitor agent for a critique of a failed episode given the
// keyframe summary and the guidance source that produced it.
std::string monitor_feedback(const episode_log& log,
                             const std::string& guidance_source,
                             chat_backend& backend,
                             const agent_prompts& prompts,
                             const keyframe_config& cfg = {});

}  // namespace grappa
