#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "grappa/agents/backend.hpp"
#include "grappa/agents/routing.hpp"
#include "grappa/grounding.hpp"
#include "grappa/gsl/parser.hpp"
#include "grappa/gsl/validate.hpp"

namespace grappa {

struct agent_prompts {
  std::string advisor;
  std::string grounding;
  std::string robotic;
  std::string monitor;

  const std::string& for_agent(agent_id id) const;
};

// Reads advisor.txt / grounding.txt / robotic.txt / monitor.txt from a
// directory.  Throws config_error when a file is missing.
agent_prompts load_prompts(const std::string& dir);

struct conversation_config {
  int turn_budget = 20;
  std::vector<robot_state> probes;  // validation probe states
  std::vector<std::string> known_objects;
  gsl::eval_budget budget;
  search_config search;
};

struct conversation_artifacts {
  // (speaker, text); speakers are agent names plus "user" and "tool".
  std::vector<std::pair<std::string, std::string>> transcript;
  std::vector<std::string> code_versions;  // every extracted script, in order
  std::vector<gsl::validation_report> validations;
  std::vector<search_trace> searches;
  std::vector<std::string> protocol_warnings;
  int turns_used = 0;
  bool terminated = false;
};

struct guidance_generation {
  std::shared_ptr<const gsl::program> program;  // last script that validated
  std::string source;
  conversation_artifacts artifacts;
};

// Drives the agent conversation until a validated script is accepted via
// TERMINATE or the turn budget runs out.  The engine executes the tool side:
// FIND requests and textual detector probes run against the live scene, and
// every extracted script is format-validated with the report echoed back into
// the conversation.  Throws protocol_failure_error when the conversation ends
// without any script passing validation.
guidance_generation generate_guidance_function(
    const std::string& task_text,
    const scene_snapshot& scene,
    detector& det,
    track_registry& tracks,
    const thesaurus& synonyms_table,
    chat_backend& backend,
    const agent_prompts& prompts,
    const conversation_config& cfg,
    const std::vector<chat_message>& extra_context = {});

}  // namespace grappa
