#include "grappa/agents/conversation.hpp"

#include <fstream>
#include <sstream>

namespace grappa {
namespace {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open prompt file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string describe_search(const std::string& name, const search_trace& trace) {
  std::ostringstream out;
  for (const auto& q : trace.queries) {
    out << "  in_the_image(\"" << q.object << "\"";
    if (q.parent) out << ", \"" << *q.parent << "\"";
    out << ") -> " << (q.verdict ? "yes" : "no") << "\n";
  }
  out << "  " << name << ": ";
  if (trace.found) {
    out << "found via [";
    for (std::size_t i = 0; i < trace.path.size(); ++i) {
      if (i) out << ", ";
      out << trace.path[i];
    }
    out << "] at depth " << trace.depth_used;
  } else {
    out << "not found";
  }
  out << "\n";
  return out.str();
}

}  // namespace

const std::string& agent_prompts::for_agent(agent_id id) const {
  switch (id) {
    case agent_id::advisor: return advisor;
    case agent_id::grounding: return grounding;
    case agent_id::robotic: return robotic;
    case agent_id::monitor: return monitor;
  }
  return advisor;
}

agent_prompts load_prompts(const std::string& dir) {
  agent_prompts p;
  p.advisor = read_text_file(dir + "/advisor.txt");
  p.grounding = read_text_file(dir + "/grounding.txt");
  p.robotic = read_text_file(dir + "/robotic.txt");
  p.monitor = read_text_file(dir + "/monitor.txt");
  return p;
}

guidance_generation generate_guidance_function(
    const std::string& task_text,
    const scene_snapshot& scene,
    detector& det,
    track_registry& tracks,
    const thesaurus& synonyms_table,
    chat_backend& backend,
    const agent_prompts& prompts,
    const conversation_config& cfg,
    const std::vector<chat_message>& extra_context) {
  guidance_generation gen;
  conversation_artifacts& art = gen.artifacts;

  art.transcript.emplace_back("user", task_text);
  for (const auto& m : extra_context) {
    art.transcript.emplace_back(m.role.empty() ? "user" : m.role, m.content);
  }

  auto build_messages = [&](agent_id current) {
    std::vector<chat_message> msgs;
    msgs.push_back({"system", prompts.for_agent(current)});
    const std::string self = to_string(current);
    for (const auto& [speaker, text] : art.transcript) {
      if (speaker == self) {
        msgs.push_back({"assistant", text});
      } else if (speaker == "user") {
        msgs.push_back({"user", text});
      } else {
        msgs.push_back({"user", speaker + ": " + text});
      }
    }
    return msgs;
  };

  agent_id current = agent_id::advisor;
  std::vector<std::string> pending_find;
  std::string latest_code;
  std::string validated_source;

  auto try_validate = [&](const std::string& code) {
    gsl::validation_report report;
    std::shared_ptr<const gsl::program> parsed;
    try {
      auto prog = std::make_shared<gsl::program>(gsl::parse(code));
      report = gsl::validate_format(*prog, cfg.probes, cfg.known_objects, cfg.budget);
      parsed = std::move(prog);
    } catch (const gsl::missing_header_error& e) {
      report.ok = false;
      report.issues.push_back({"MissingHeader", e.what(), {}, -1});
    } catch (const gsl::syntax_error& e) {
      report.ok = false;
      report.issues.push_back({"SyntaxError", e.what(), e.where(), -1});
    }
    art.validations.push_back(report);
    art.transcript.emplace_back("tool", "validation report:\n" + gsl::render_report(report));
    if (report.ok && parsed) {
      gen.program = parsed;
      gen.source = code;
      validated_source = code;
    }
    return report.ok;
  };

  while (art.turns_used < cfg.turn_budget) {
    std::string reply = backend.complete(to_string(current), build_messages(current));
    ++art.turns_used;
    art.transcript.emplace_back(to_string(current), reply);

    route_result route = route_message(reply);
    if (route.protocol_warning) art.protocol_warnings.push_back(*route.protocol_warning);

    std::string code = extract_code_block(reply);
    if (!code.empty()) {
      latest_code = code;
      art.code_versions.push_back(code);
    }
    for (auto& name : parse_find_requests(reply)) pending_find.push_back(std::move(name));

    // Textual detector probes run immediately; the verdicts flow back as a
    // tool message every participant sees.
    auto probes = parse_image_probes(reply);
    if (!probes.empty()) {
      std::ostringstream out;
      for (const auto& probe : probes) {
        out << "in_the_image(\"" << probe.object << "\"";
        if (probe.parent) out << ", \"" << *probe.parent << "\"";
        out << ") -> ";
        try {
          bool verdict = det.in_the_image(scene, probe.object, probe.parent, tracks);
          if (verdict && !tracks.registered(probe.object)) {
            if (const scene_object* obj = scene.find_name(probe.object)) {
              tracks.add(probe.object, obj->id);
            }
          }
          out << (verdict ? "yes" : "no");
        } catch (const unknown_parent_error& e) {
          out << "error: " << e.what();
        }
        out << "\n";
      }
      art.transcript.emplace_back("tool", out.str());
    }

    if (route.terminate) {
      art.terminated = true;
      if (!validated_source.empty() && latest_code == validated_source) break;
      if (!latest_code.empty() && try_validate(latest_code)) break;
      if (!validated_source.empty()) break;  // fall back to the last good script
      throw protocol_failure_error("conversation terminated without a valid script");
    }

    if (route.next == agent_id::grounding && !pending_find.empty()) {
      std::ostringstream out;
      out << "grounding results:\n";
      for (const auto& name : pending_find) {
        thesaurus_entry entry;
        auto it = synonyms_table.find(normalize_object_name(name));
        if (it != synonyms_table.end()) entry = it->second;
        search_trace trace = multi_granular_search(det, tracks, scene, name,
                                                   entry.synonyms, entry.parents,
                                                   cfg.search);
        art.searches.push_back(trace);
        out << describe_search(name, trace);
      }
      pending_find.clear();
      art.transcript.emplace_back("tool", out.str());
    }

    if (route.next == agent_id::robotic && !latest_code.empty() &&
        latest_code != validated_source) {
      try_validate(latest_code);
    }

    current = route.next;
  }

  if (!gen.program) {
    throw protocol_failure_error("turn budget exhausted without a valid script");
  }
  return gen;
}

}  // namespace grappa
