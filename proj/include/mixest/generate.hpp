#pragma once

// AI reference-corpus generation through a chat-completion style endpoint.

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace mixest {

struct GenEndpointConfig {
  // Full endpoint URL, e.g. "https://api.example.com/v1/chat/completions".
  std::string base_url;
  // Name of the environment variable holding the bearer token. Empty means
  // the endpoint takes no authentication. The secret itself never lives in a
  // config file.
  std::string auth_token_env_var;
  std::string model_name;
  std::string system_prompt;
  int max_retries = 3;
  std::chrono::seconds timeout{60};
  std::chrono::milliseconds retry_backoff{500};  // doubled after every failed attempt
  unsigned concurrency = 1;
  std::string response_path = "choices[0].message.content";
};

// One HTTP exchange. Implementations throw TransportError on network failure
// or a non-2xx status.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual std::string post(const std::string& body) = 0;
};

class HttpChatTransport : public ChatTransport {
 public:
  HttpChatTransport(const GenEndpointConfig& config, std::optional<std::string> bearer_token);
  ~HttpChatTransport() override;
  std::string post(const std::string& body) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Reads the secret named by auth_token_env_var. Returns nullopt when no
// variable is configured; throws AuthError when it is configured but unset.
std::optional<std::string> resolve_auth_token(const GenEndpointConfig& config);

nlohmann::json build_chat_request(const GenEndpointConfig& config, const std::string& prompt);

// Walks a path like "choices[0].message.content". Throws TransportError
// (non-retryable) when the field is missing or not a non-empty string.
std::string extract_completion(const nlohmann::json& response, const std::string& path);

// Sends every prompt, retrying failed requests, and writes one JSONL
// RawRecord per successful completion (label "ai") to out_path in prompt
// order. Prompts that still fail after max_retries are logged and skipped.
// Throws InputError on an empty prompt list, AuthError when the secret is
// missing, TransportError when every prompt failed.
std::size_t generate_ai_reference(const std::vector<std::string>& prompts,
                                  const GenEndpointConfig& config,
                                  const std::filesystem::path& out_path,
                                  ChatTransport* transport = nullptr);

// One prompt per non-blank line.
std::vector<std::string> read_prompts(const std::filesystem::path& path);

}  // namespace mixest
