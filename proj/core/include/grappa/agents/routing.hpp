#pragma once

#include <optional>
#include <string>
#include <vector>

namespace grappa {

enum class agent_id { advisor, grounding, robotic, monitor };

std::string to_string(agent_id id);

struct route_result {
  bool terminate = false;
  agent_id next = agent_id::advisor;
  // Set when the reply carried no usable directive or named an unknown agent;
  // control then defaults back to the advisor.
  std::optional<std::string> protocol_warning;
};

// Reads the hand-off directive from a reply's last non-empty line: either the
// exact token TERMINATE, or a trailing "NEXT: <agent>".  Accepted agent names
// include the conversational aliases (supervisor agent -> advisor,
// perception agent -> grounding, robotic agent -> robotic).
route_result route_message(const std::string& text);

// Returns the contents of the LAST complete ``` fenced block, with the
// required `#gsl 1` header prepended when the block lacks one.  Empty string
// when the text has no complete fenced block.
std::string extract_code_block(const std::string& text);

struct image_probe {
  std::string object;
  std::optional<std::string> parent;
};

// Scans a reply for textual detector invocations of the form
// in_the_image("name") or in_the_image("name", "parent").
std::vector<image_probe> parse_image_probes(const std::string& text);

// Scans for "FIND: a, b, c" request lines and returns the listed names.
std::vector<std::string> parse_find_requests(const std::string& text);

}  // namespace grappa
