#include "mixest/generate.hpp"

#include "mixest/common.hpp"
#include "mixest/errors.hpp"

#include <httplib.h>

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <thread>

namespace mixest {

using nlohmann::json;

namespace {

struct ParsedUrl {
  std::string scheme_host_port;
  std::string path;
};

ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw InputError("endpoint URL lacks a scheme: '" + url + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl out;
  if (path_start == std::string::npos) {
    out.scheme_host_port = url;
    out.path = "/v1/chat/completions";
  } else {
    out.scheme_host_port = url.substr(0, path_start);
    out.path = url.substr(path_start);
  }
  return out;
}

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

struct HttpChatTransport::Impl {
  ParsedUrl url;
  std::optional<std::string> bearer;
  std::chrono::seconds timeout;
};

HttpChatTransport::HttpChatTransport(const GenEndpointConfig& config,
                                     std::optional<std::string> bearer_token)
    : impl_(std::make_unique<Impl>(Impl{parse_url(config.base_url), std::move(bearer_token),
                                        config.timeout})) {}

HttpChatTransport::~HttpChatTransport() = default;

std::string HttpChatTransport::post(const std::string& body) {
  // One client per call keeps concurrent posts independent.
  httplib::Client client(impl_->url.scheme_host_port);
  if (!client.is_valid()) {
    throw TransportError("unsupported endpoint '" + impl_->url.scheme_host_port + "'", false);
  }
  const auto t = static_cast<time_t>(impl_->timeout.count());
  client.set_connection_timeout(t, 0);
  client.set_read_timeout(t, 0);
  client.set_write_timeout(t, 0);
  httplib::Headers headers;
  if (impl_->bearer) headers.emplace("Authorization", "Bearer " + *impl_->bearer);
  auto res = client.Post(impl_->url.path, headers, body, "application/json");
  if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300) {
    throw TransportError("HTTP " + std::to_string(res->status), retryable_status(res->status));
  }
  return res->body;
}

std::optional<std::string> resolve_auth_token(const GenEndpointConfig& config) {
  if (config.auth_token_env_var.empty()) return std::nullopt;
  const char* value = std::getenv(config.auth_token_env_var.c_str());
  if (value == nullptr || *value == '\0') {
    throw AuthError("environment variable " + config.auth_token_env_var + " is not set");
  }
  return std::string(value);
}

json build_chat_request(const GenEndpointConfig& config, const std::string& prompt) {
  json messages = json::array();
  if (!config.system_prompt.empty()) {
    messages.push_back({{"role", "system"}, {"content", config.system_prompt}});
  }
  messages.push_back({{"role", "user"}, {"content", prompt}});
  return json{{"model", config.model_name}, {"messages", std::move(messages)}};
}

std::string extract_completion(const json& response, const std::string& path) {
  const json* node = &response;
  std::size_t i = 0;
  auto fail = [&](const std::string& why) -> std::string {
    throw TransportError("response field '" + path + "' " + why, false);
  };
  while (i < path.size()) {
    if (path[i] == '.') {
      ++i;
      continue;
    }
    if (path[i] == '[') {
      const auto close = path.find(']', i);
      if (close == std::string::npos) return fail("has an unterminated index");
      const std::size_t index = std::stoul(path.substr(i + 1, close - i - 1));
      if (!node->is_array() || index >= node->size()) return fail("is missing");
      node = &(*node)[index];
      i = close + 1;
      continue;
    }
    std::size_t j = i;
    while (j < path.size() && path[j] != '.' && path[j] != '[') ++j;
    const std::string key = path.substr(i, j - i);
    if (!node->is_object() || !node->contains(key)) return fail("is missing");
    node = &(*node)[key];
    i = j;
  }
  if (!node->is_string()) return fail("is not a string");
  std::string text = node->get<std::string>();
  bool blank = true;
  for (unsigned char c : text) blank = blank && std::isspace(c);
  if (blank) return fail("is empty");
  return text;
}

std::vector<std::string> read_prompts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read prompts '" + path.string() + "'");
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    bool blank = true;
    for (unsigned char c : line) blank = blank && std::isspace(c);
    if (!blank) out.push_back(line);
  }
  return out;
}

std::size_t generate_ai_reference(const std::vector<std::string>& prompts,
                                  const GenEndpointConfig& config,
                                  const std::filesystem::path& out_path,
                                  ChatTransport* transport) {
  if (prompts.empty()) throw InputError("no prompts given");
  if (config.max_retries < 0) throw InputError("max_retries must be >= 0");

  std::unique_ptr<ChatTransport> owned;
  if (transport == nullptr) {
    owned = std::make_unique<HttpChatTransport>(config, resolve_auth_token(config));
    transport = owned.get();
  } else {
    resolve_auth_token(config);
  }

  std::vector<std::optional<std::string>> completions(prompts.size());
  std::vector<std::string> last_error(prompts.size());

  parallel_for(prompts.size(), std::max(1u, config.concurrency), [&](std::size_t k) {
    const std::string body = build_chat_request(config, prompts[k]).dump();
    auto backoff = config.retry_backoff;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
      try {
        const std::string raw = transport->post(body);
        json parsed;
        try {
          parsed = json::parse(raw);
        } catch (const json::parse_error&) {
          throw TransportError("response is not JSON", false);
        }
        completions[k] = extract_completion(parsed, config.response_path);
        return;
      } catch (const TransportError& e) {
        last_error[k] = e.what();
        if (!e.retryable()) return;
      }
      if (attempt < config.max_retries && backoff.count() > 0) {
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
      }
    }
  });

  std::size_t written = 0;
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + out_path.string() + "'");
  for (std::size_t k = 0; k < prompts.size(); ++k) {
    if (!completions[k]) {
      log_warn("prompt " + std::to_string(k) + " failed after " +
               std::to_string(config.max_retries + 1) + " attempt(s): " + last_error[k]);
      continue;
    }
    json rec{{"id", "gen-" + std::to_string(k)},
             {"text", *completions[k]},
             {"meta", {{"prompt_index", k}, {"model", config.model_name}}},
             {"label", "ai"}};
    out << rec.dump() << '\n';
    ++written;
  }
  out.close();
  if (written == 0) {
    throw TransportError("all " + std::to_string(prompts.size()) + " prompts failed; last error: " +
                         last_error.back());
  }
  return written;
}

}  // namespace mixest
