#include "grappa/agents/backend.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace grappa {
namespace {

using nlohmann::json;

class scripted_backend : public chat_backend {
 public:
  explicit scripted_backend(const json& doc) {
    if (!doc.is_object()) throw config_error("transcript must be a JSON object");
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      if (!it.value().is_array()) {
        throw config_error("transcript entry '" + it.key() + "' must be an array");
      }
      auto& replies = replies_[it.key()];
      for (const auto& r : it.value()) replies.push_back(r.get<std::string>());
    }
  }

  std::string complete(const std::string& agent,
                       const std::vector<chat_message>&) override {
    auto it = replies_.find(agent);
    if (it == replies_.end() || cursor_[agent] >= it->second.size()) {
      throw transcript_exhausted_error(agent);
    }
    return it->second[cursor_[agent]++];
  }

 private:
  std::map<std::string, std::vector<std::string>> replies_;
  std::map<std::string, std::size_t> cursor_;
};

struct parsed_url {
  std::string origin;  // scheme://host[:port]
  std::string path;    // leading slash, defaults to "/v1/chat/completions"
};

parsed_url split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw config_error("backend url needs a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  parsed_url out;
  if (path_start == std::string::npos) {
    out.origin = url;
    out.path = "/v1/chat/completions";
  } else {
    out.origin = url.substr(0, path_start);
    out.path = url.substr(path_start);
  }
  return out;
}

class http_backend : public chat_backend {
 public:
  explicit http_backend(backend_config cfg) : cfg_(std::move(cfg)) {
    if (cfg_.url.empty()) {
      if (const char* env = std::getenv("GRAPPA_LLM_URL")) cfg_.url = env;
    }
    if (cfg_.url.empty()) throw config_error("no backend url (set GRAPPA_LLM_URL)");
    std::string key_var = cfg_.key_env_var;
    if (key_var.empty()) {
      if (const char* env = std::getenv("GRAPPA_LLM_KEY_VAR")) key_var = env;
    }
    if (!key_var.empty()) {
      if (const char* key = std::getenv(key_var.c_str())) api_key_ = key;
    }
  }

  std::string complete(const std::string&,
                       const std::vector<chat_message>& messages) override {
    json body;
    body["model"] = cfg_.model;
    body["temperature"] = cfg_.temperature;
    body["max_tokens"] = cfg_.max_tokens;
    json msgs = json::array();
    for (const auto& m : messages) {
      msgs.push_back({{"role", m.role}, {"content", m.content}});
    }
    body["messages"] = msgs;
    const std::string payload = body.dump();

    parsed_url target = split_url(cfg_.url);
    std::string last_failure = "no attempts made";
    int last_status = 0;

    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
      if (attempt > 0) {
        double delay = cfg_.retry_base_seconds * std::ldexp(1.0, attempt - 1);
        std::this_thread::sleep_for(std::chrono::duration<double>(delay));
      }
      httplib::Client client(target.origin);
      client.set_connection_timeout(cfg_.timeout_seconds, 0);
      client.set_read_timeout(cfg_.timeout_seconds, 0);
      httplib::Headers headers;
      if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

      auto res = client.Post(target.path, headers, payload, "application/json");
      if (!res) {
        last_failure = "connection failed: " + httplib::to_string(res.error());
        last_status = 0;
        continue;  // transport errors are retryable
      }
      if (res->status == 429 || res->status >= 500) {
        last_failure = "status " + std::to_string(res->status);
        last_status = res->status;
        continue;
      }
      if (res->status != 200) {
        throw backend_error(res->status,
                            "request rejected with status " + std::to_string(res->status));
      }
      try {
        json reply = json::parse(res->body);
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const json::exception& e) {
        throw backend_error(res->status, std::string("malformed completion: ") + e.what());
      }
    }
    throw backend_error(last_status, "retries exhausted; last failure: " + last_failure);
  }

 private:
  backend_config cfg_;
  std::string api_key_;
};

}  // namespace

std::unique_ptr<chat_backend> make_backend(const backend_config& cfg) {
  if (cfg.kind == backend_config::backend_kind::scripted) {
    if (cfg.transcript_path.empty()) {
      throw config_error("scripted backend needs a transcript path");
    }
    std::ifstream in(cfg.transcript_path);
    if (!in) throw config_error("cannot open transcript: " + cfg.transcript_path);
    json doc;
    try {
      in >> doc;
    } catch (const json::exception& e) {
      throw config_error("invalid transcript JSON: " + std::string(e.what()));
    }
    return std::make_unique<scripted_backend>(doc);
  }
  return std::make_unique<http_backend>(cfg);
}

std::unique_ptr<chat_backend> make_scripted_backend_from_text(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw config_error("invalid transcript JSON: " + std::string(e.what()));
  }
  return std::make_unique<scripted_backend>(doc);
}

}  // namespace grappa
