#pragma once

#include <memory>
#include <string>
#include <vector>

#include "grappa/errors.hpp"

namespace grappa {

struct chat_message {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;
};

class backend_error : public error {
 public:
  backend_error(int status, const std::string& what)
      : error("backend: " + what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

class transcript_exhausted_error : public error {
 public:
  explicit transcript_exhausted_error(const std::string& agent)
      : error("scripted transcript has no more replies for agent '" + agent + "'") {}
};

class protocol_failure_error : public error {
 public:
  explicit protocol_failure_error(const std::string& what)
      : error("agent protocol failure: " + what) {}
};

struct backend_config {
  enum class backend_kind { scripted, http };
  backend_kind kind = backend_kind::scripted;

  // scripted: path to a JSON map { "<agent>": ["reply", ...] }.
  std::string transcript_path;

  // http: an OpenAI-style chat completions endpoint.
  std::string url;                               // falls back to $GRAPPA_LLM_URL
  std::string model = "gpt-4o-mini-2024-07-18";  // requested model name
  std::string key_env_var;  // name of the env var holding the API key;
                            // falls back to the name stored in $GRAPPA_LLM_KEY_VAR
  double temperature = 0.0;
  int max_tokens = 2000;
  int max_retries = 3;
  double retry_base_seconds = 1.0;  // doubles per attempt
  int timeout_seconds = 30;
};

// One completion source shared by all agents.  `agent` selects the reply
// stream in scripted mode and is ignored over HTTP.
class chat_backend {
 public:
  virtual ~chat_backend() = default;
  virtual std::string complete(const std::string& agent,
                               const std::vector<chat_message>& messages) = 0;
};

std::unique_ptr<chat_backend> make_backend(const backend_config& cfg);

// Scripted backend preloaded from parsed JSON text (used by tests).
std::unique_ptr<chat_backend> make_scripted_backend_from_text(const std::string& json_text);

}  // namespace grappa
