#include "grappa/agents/routing.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace grappa {
namespace {

std::string trim(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::string last_nonempty_line(const std::string& text) {
  std::string line;
  std::string last;
  std::istringstream in(text);
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (!t.empty()) last = t;
  }
  return last;
}

// lowercase, spaces to underscores, trailing punctuation dropped
std::string canonical_agent_name(std::string name) {
  while (!name.empty() && (name.back() == '.' || name.back() == '!')) name.pop_back();
  name = trim(name);
  for (char& c : name) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (c == ' ') c = '_';
  }
  return name;
}

std::optional<agent_id> lookup_agent(const std::string& canonical) {
  if (canonical == "supervisor_agent" || canonical == "supervisor" ||
      canonical == "advisor_agent" || canonical == "advisor") {
    return agent_id::advisor;
  }
  if (canonical == "perception_agent" || canonical == "perception" ||
      canonical == "grounding_agent" || canonical == "grounding") {
    return agent_id::grounding;
  }
  if (canonical == "robotic_agent" || canonical == "robotic" ||
      canonical == "robot_agent") {
    return agent_id::robotic;
  }
  if (canonical == "monitor_agent" || canonical == "monitor") {
    return agent_id::monitor;
  }
  return std::nullopt;
}

bool is_quote(char c) { return c == '"' || c == '\''; }

}  // namespace

std::string to_string(agent_id id) {
  switch (id) {
    case agent_id::advisor: return "advisor";
    case agent_id::grounding: return "grounding";
    case agent_id::robotic: return "robotic";
    case agent_id::monitor: return "monitor";
  }
  return "advisor";
}

route_result route_message(const std::string& text) {
  route_result out;
  std::string line = last_nonempty_line(text);
  if (line == "TERMINATE") {
    out.terminate = true;
    return out;
  }
  auto pos = line.rfind("NEXT:");
  if (pos == std::string::npos) {
    out.protocol_warning = "reply has no TERMINATE or NEXT directive";
    out.next = agent_id::advisor;
    return out;
  }
  std::string name = canonical_agent_name(trim(line.substr(pos + 5)));
  if (auto id = lookup_agent(name)) {
    out.next = *id;
    return out;
  }
  out.protocol_warning = "unknown agent in NEXT directive: " + name;
  out.next = agent_id::advisor;
  return out;
}

std::string extract_code_block(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::string current;
  std::string last_complete;
  bool inside = false;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.rfind("```", 0) == 0) {
      if (!inside) {
        inside = true;
        current.clear();
      } else {
        inside = false;
        last_complete = current;
      }
      continue;
    }
    if (inside) {
      current += line;
      current += "\n";
    }
  }
  if (last_complete.empty()) return "";
  std::string body = last_complete;
  // Tolerate replies that drop the header line; the language requires it.
  std::string first = trim(body.substr(0, body.find('\n')));
  if (first.rfind("#gsl", 0) != 0) body = "#gsl 1\n" + body;
  return body;
}

std::vector<image_probe> parse_image_probes(const std::string& text) {
  std::vector<image_probe> probes;
  const std::string needle = "in_the_image";
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    std::size_t cur = pos + needle.size();
    pos = cur;
    while (cur < text.size() && std::isspace(static_cast<unsigned char>(text[cur]))) ++cur;
    if (cur >= text.size() || text[cur] != '(') continue;
    std::size_t close = text.find(')', cur);
    if (close == std::string::npos) continue;
    std::string args = text.substr(cur + 1, close - cur - 1);

    image_probe probe;
    std::vector<std::string> parts;
    std::string part;
    std::istringstream argstream(args);
    while (std::getline(argstream, part, ',')) parts.push_back(trim(part));
    if (parts.empty() || parts.size() > 2) continue;
    bool ok = true;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      std::string& p = parts[i];
      if (p.size() < 2 || !is_quote(p.front()) || p.back() != p.front()) {
        ok = false;
        break;
      }
      p = p.substr(1, p.size() - 2);
    }
    if (!ok) continue;
    probe.object = parts[0];
    if (parts.size() == 2) probe.parent = parts[1];
    probes.push_back(std::move(probe));
    pos = close + 1;
  }
  return probes;
}

std::vector<std::string> parse_find_requests(const std::string& text) {
  std::vector<std::string> names;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.rfind("FIND:", 0) != 0) continue;
    std::string rest = t.substr(5);
    std::string item;
    std::istringstream items(rest);
    while (std::getline(items, item, ',')) {
      std::string name = trim(item);
      if (!name.empty()) names.push_back(name);
    }
  }
  return names;
}

}  // namespace grappa
