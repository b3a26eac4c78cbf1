#include "grappa/episode_log.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "grappa/errors.hpp"
#include "json.hpp"

namespace grappa {

namespace {

using nlohmann::json;

json state_to_json(const robot_state& s) {
  auto v = s.to_array();
  return json(std::vector<double>(v.begin(), v.end()));
}

robot_state state_from_json(const json& j) {
  auto v = j.get<std::vector<double>>();
  if (v.size() != 7) throw error("robot state array must have 7 entries");
  std::array<double, 7> a;
  std::copy(v.begin(), v.end(), a.begin());
  return robot_state::from_array(a);
}

json hidden_to_json(const hidden_state& h) {
  json j = json::object();
  for (const auto& [key, value] : h) {
    if (std::holds_alternative<bool>(value)) {
      j[key] = std::get<bool>(value);
    } else {
      j[key] = std::get<double>(value);
    }
  }
  return j;
}

hidden_state hidden_from_json(const json& j) {
  hidden_state h;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.value().is_boolean()) {
      h[it.key()] = it.value().get<bool>();
    } else {
      h[it.key()] = it.value().get<double>();
    }
  }
  return h;
}

}  // namespace

void episode_log::to_stream(std::ostream& out, log_detail detail) const {
  json header = {{"task_id", task_id},
                 {"seed", seed},
                 {"guidance_version", guidance_version}};
  out << header.dump() << "\n";

  for (const auto& st : steps) {
    json j = {{"step", st.step},
              {"state", state_to_json(st.state)},
              {"action", state_to_json(st.action)},
              {"chosen", st.chosen},
              {"hidden_before", hidden_to_json(st.hidden_before)},
              {"hidden_after", hidden_to_json(st.hidden_after)},
              {"fallback", st.fallback}};
    if (st.fallback) j["fallback_reason"] = st.fallback_reason;
    if (detail >= log_detail::scores) {
      j["base_raw"] = st.base_raw;
      j["base_probs"] = st.base_probs;
      j["guidance_raw"] = st.guidance_raw;
      j["guidance_probs"] = st.guidance_probs;
      j["combined"] = st.combined;
    }
    if (detail == log_detail::full) {
      json cands = json::array();
      for (const auto& c : st.candidates) cands.push_back(state_to_json(c));
      j["candidates"] = cands;
    }
    out << j.dump() << "\n";
  }

  json result = {{"success", success},
                 {"failure_class", to_string(failure)},
                 {"steps", steps.size()},
                 {"final_state", state_to_json(final_state)}};
  out << result.dump() << "\n";
}

episode_log episode_log::from_stream(std::istream& in) {
  episode_log log;
  std::string line;
  std::vector<json> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    records.push_back(json::parse(line));
  }
  if (records.size() < 2) throw error("episode log needs header and result records");

  const json& header = records.front();
  log.task_id = header.at("task_id").get<std::string>();
  log.seed = header.at("seed").get<std::uint64_t>();
  log.guidance_version = header.at("guidance_version").get<std::string>();

  const json& result = records.back();
  log.success = result.at("success").get<bool>();
  log.failure = failure_class_from_string(result.at("failure_class").get<std::string>());
  log.final_state = state_from_json(result.at("final_state"));

  for (std::size_t i = 1; i + 1 < records.size(); ++i) {
    const json& j = records[i];
    step_trace st;
    st.step = j.at("step").get<int>();
    st.state = state_from_json(j.at("state"));
    st.action = state_from_json(j.at("action"));
    st.chosen = j.at("chosen").get<std::size_t>();
    st.hidden_before = hidden_from_json(j.at("hidden_before"));
    st.hidden_after = hidden_from_json(j.at("hidden_after"));
    st.fallback = j.at("fallback").get<bool>();
    if (j.contains("fallback_reason")) st.fallback_reason = j.at("fallback_reason").get<std::string>();
    if (j.contains("base_raw")) {
      st.base_raw = j.at("base_raw").get<score_vector>();
      st.base_probs = j.at("base_probs").get<score_vector>();
      st.guidance_raw = j.at("guidance_raw").get<score_vector>();
      st.guidance_probs = j.at("guidance_probs").get<score_vector>();
      st.combined = j.at("combined").get<score_vector>();
    }
    if (j.contains("candidates")) {
      for (const auto& c : j.at("candidates")) {
        st.candidates.push_back(state_from_json(c));
      }
    }
    log.steps.push_back(std::move(st));
  }
  return log;
}

void episode_log::save_atomic(const std::string& path, log_detail detail) const {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw error("cannot open '" + tmp.string() + "' for writing");
    to_stream(out, detail);
  }
  fs::rename(tmp, target);
}

episode_log episode_log::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error("cannot open episode log '" + path + "'");
  return from_stream(in);
}

std::string guidance_version_string(const std::string& label,
                                    const std::string& source) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : source) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return label + "#" + buf;
}

}  // namespace grappa
