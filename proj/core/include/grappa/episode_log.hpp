#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "grappa/types.hpp"

namespace grappa {

// Everything recorded about one decision step.  The guidance vectors stay
// empty for base-policy-only steps.
struct step_trace {
  int step = 0;
  robot_state state;                    // state the decision was made from
  robot_state action;                   // chosen candidate
  std::vector<robot_state> candidates;  // full candidate set
  score_vector base_raw;
  score_vector base_probs;
  score_vector guidance_raw;
  score_vector guidance_probs;
  score_vector combined;
  std::size_t chosen = 0;
  hidden_state hidden_before;
  hidden_state hidden_after;
  bool fallback = false;         // guidance was unavailable this step
  std::string fallback_reason;   // "perception" or "budget" when fallback
};

// How much of each step lands in the serialized log.
enum class log_detail { minimal, scores, full };

struct episode_log {
  std::string task_id;
  std::uint64_t seed = 0;
  std::string guidance_version;  // source label + content hash, or "none"
  std::vector<step_trace> steps;
  bool success = false;
  failure_class failure = failure_class::none;
  robot_state final_state;

  // One JSON object per line: header record, one record per step, result
  // record.  Field names match the struct members.
  void to_stream(std::ostream& out, log_detail detail = log_detail::scores) const;
  static episode_log from_stream(std::istream& in);

  // Writes to a temp file in the same directory, then renames into place.
  void save_atomic(const std::string& path,
                   log_detail detail = log_detail::scores) const;
  static episode_log load(const std::string& path);
};

// Stable content label for a guidance program: "<label>#<fnv1a64 hex>".
std::string guidance_version_string(const std::string& label,
                                    const std::string& source);

}  // namespace grappa
