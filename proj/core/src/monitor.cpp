#include "grappa/agents/monitor.hpp"

#include <cstdio>
#include <set>
#include <sstream>

namespace grappa {
namespace {

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::vector<std::string> hidden_key_union(const episode_log& log) {
  std::set<std::string> keys;
  for (const auto& st : log.steps) {
    for (const auto& [k, v] : st.hidden_after) keys.insert(k);
  }
  return {keys.begin(), keys.end()};
}

double hidden_as_number(const hidden_state& h, const std::string& key) {
  auto it = h.find(key);
  if (it == h.end()) return 0.0;
  if (const bool* b = std::get_if<bool>(&it->second)) return *b ? 1.0 : 0.0;
  return std::get<double>(it->second);
}

}  // namespace

std::vector<std::vector<double>> episode_feature_rows(const episode_log& log) {
  std::vector<std::string> keys = hidden_key_union(log);
  std::vector<std::vector<double>> rows;
  rows.reserve(log.steps.size());
  for (const auto& st : log.steps) {
    std::array<double, 7> arr = st.state.to_array();
    std::vector<double> row(arr.begin(), arr.end());
    for (const auto& k : keys) row.push_back(hidden_as_number(st.hidden_after, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string keyframe_summary(const episode_log& log, const keyframe_config& cfg) {
  std::ostringstream out;
  out << "episode " << log.task_id << " seed " << log.seed << ": "
      << (log.success ? "success" : "failure");
  if (!log.success) out << " (" << to_string(log.failure) << ")";
  out << " after " << log.steps.size() << " steps\n";

  if (log.steps.empty()) return out.str();

  std::vector<std::size_t> picks = extract_keyframes(episode_feature_rows(log), cfg);
  std::vector<std::string> keys = hidden_key_union(log);

  out << "keyframes (" << picks.size() << " of " << log.steps.size() << "):\n";
  for (std::size_t idx : picks) {
    const step_trace& st = log.steps[idx];
    out << "step " << st.step << ": pos=[" << fixed4(st.state.position[0]) << ", "
        << fixed4(st.state.position[1]) << ", " << fixed4(st.state.position[2])
        << "] grip=" << fixed4(st.state.gripper);
    if (st.fallback) out << " [guidance fallback: " << st.fallback_reason << "]";
    if (!keys.empty()) {
      out << " hidden: ";
      bool first = true;
      for (const auto& k : keys) {
        if (!first) out << ", ";
        first = false;
        auto it = st.hidden_after.find(k);
        out << k << "=";
        if (it == st.hidden_after.end()) {
          out << "-";
        } else if (const bool* b = std::get_if<bool>(&it->second)) {
          out << (*b ? "true" : "false");
        } else {
          out << fixed4(std::get<double>(it->second));
        }
      }
    }
    out << "\n";
  }
  return out.str();
}

std::string monitor_feedback(const episode_log& log,
                             const std::string& guidance_source,
                             chat_backend& backend,
                             const agent_prompts& prompts,
                             const keyframe_config& cfg) {
  std::ostringstream user;
  user << "Guidance function under evaluation:\n```\n"
       << guidance_source << "\n```\n\n"
       << "Episode keyframe summary:\n"
       << keyframe_summary(log, cfg);

  std::vector<chat_message> messages;
  messages.push_back({"system", prompts.monitor});
  messages.push_back({"user", user.str()});
  return backend.complete("monitor", messages);
}

}  // namespace grappa
