#ifndef TAGAD_HTTP_TRANSPORT_HPP
#define TAGAD_HTTP_TRANSPORT_HPP

// HTTP transports for remote chat-completion and embedding services. Kept
// out of the other headers so only binaries that talk to the network pull in
// the HTTP client.

#include <chrono>
#include <cstdlib>
#include <memory>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "httplib.h"
#include "tagad/embedding.hpp"
#include "tagad/error.hpp"
#include "tagad/llm_client.hpp"

namespace tagad {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

inline Endpoint split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "endpoint needs a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

inline std::string credential_from_env(const std::string& variable) {
  const char* value = std::getenv(variable.c_str());
  if (value == nullptr || *value == '\0') {
    throw Error(ErrorCode::kAuthMissing,
                "environment variable " + variable + " is not set");
  }
  return value;
}

inline bool transient_status(int status) {
  return status == 408 || status == 429 || status >= 500;
}

struct RemoteChatConfig {
  std::string endpoint;
  std::string credential_env = "TAGAD_API_KEY";
  std::chrono::seconds timeout{120};
};

inline nlohmann::json chat_request_body(const ChatRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  if (!request.system.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system}});
  }
  messages.push_back({{"role", "user"}, {"content", request.user}});
  return {{"model", request.model},
          {"messages", messages},
          {"temperature", request.temperature},
          {"max_tokens", request.max_tokens}};
}

inline TransportReply parse_chat_response(const std::string& body) {
  nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.contains("choices") || j["choices"].empty()) {
    throw TransportError(200, true, "malformed chat response");
  }
  const auto& message = j["choices"][0]["message"];
  TransportReply reply;
  if (message.contains("content") && message["content"].is_string()) {
    reply.text = message["content"].get<std::string>();
  }
  if (j.contains("usage") && j["usage"].is_object()) {
    reply.usage = TokenUsage{j["usage"].value("prompt_tokens", 0L),
                             j["usage"].value("completion_tokens", 0L)};
  }
  return reply;
}

// Chat-completions wire shape: bearer credential, messages [system, user],
// temperature, max_tokens; the first choice's message text is returned.
inline CompletionFn http_chat_transport(const RemoteChatConfig& config) {
  const std::string key = credential_from_env(config.credential_env);
  const Endpoint ep = split_endpoint(config.endpoint);
  const auto timeout = config.timeout;
  return [ep, key, timeout](const ChatRequest& request) -> TransportReply {
    httplib::Client client(ep.origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers headers{{"Authorization", "Bearer " + key}};
    auto res = client.Post(ep.path, headers, chat_request_body(request).dump(),
                           "application/json");
    if (!res) {
      throw TransportError(0, true,
                           "transport error: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw TransportError(res->status, transient_status(res->status),
                           "HTTP " + std::to_string(res->status));
    }
    return parse_chat_response(res->body);
  };
}

// Embedding wire shape: {"model", "input": [...]} answered by
// {"data": [{"embedding": [...]}, ...]} in input order.
inline EmbedTransport http_embed_transport(const ProviderConfig& config,
                                           std::chrono::seconds timeout =
                                               std::chrono::seconds{120}) {
  const std::string key = credential_from_env(config.credential_env);
  const Endpoint ep = split_endpoint(config.endpoint);
  const std::string model = config.model;
  return [ep, key, model, timeout](const std::vector<std::string>& texts) {
    httplib::Client client(ep.origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    httplib::Headers headers{{"Authorization", "Bearer " + key}};
    nlohmann::json body{{"model", model}, {"input", texts}};
    auto res = client.Post(ep.path, headers, body.dump(), "application/json");
    if (!res || res->status != 200) {
      throw Error(ErrorCode::kProviderUnavailable,
                  res ? "HTTP " + std::to_string(res->status)
                      : "transport error: " + httplib::to_string(res.error()));
    }
    nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains("data") || !j["data"].is_array()) {
      throw Error(ErrorCode::kProviderUnavailable,
                  "malformed embedding response");
    }
    std::vector<Vector> out;
    for (const auto& item : j["data"]) {
      out.push_back(item.at("embedding").get<Vector>());
    }
    return out;
  };
}

}  // namespace tagad

#endif  // TAGAD_HTTP_TRANSPORT_HPP
