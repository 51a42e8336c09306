#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "svaug/augment.hpp"
#include "svaug/error.hpp"

namespace svaug {

namespace {

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

constexpr std::string_view kParaphrasePrompt =
    "As a software security expert, please paraphrase the following text: ";

}  // namespace

std::string StubContextualClient::rewrite(const std::string& text,
                                          ContextualMode mode) {
  auto tokens = tokenize(text);
  if (tokens.size() < 2) return text;
  if (mode == ContextualMode::BackTranslate) {
    std::rotate(tokens.begin(), tokens.begin() + 1, tokens.end());
  } else {
    std::reverse(tokens.begin(), tokens.end());
  }
  return join_tokens(tokens);
}

HttpContextualClient::HttpContextualClient(std::string base_url,
                                           int max_attempts, int backoff_ms)
    : base_url_(std::move(base_url)),
      max_attempts_(max_attempts),
      backoff_ms_(backoff_ms) {}

std::string HttpContextualClient::rewrite(const std::string& text,
                                          ContextualMode mode) {
  nlohmann::json body;
  body["text"] = text;
  body["mode"] =
      mode == ContextualMode::BackTranslate ? "back_translate" : "paraphrase";
  if (mode == ContextualMode::Paraphrase)
    body["prompt"] = std::string(kParaphrasePrompt) + text;
  std::string payload = body.dump();

  std::string last_error;
  for (int attempt = 1; attempt <= max_attempts_; ++attempt) {
    if (attempt > 1)
      std::this_thread::sleep_for(
          std::chrono::milliseconds(backoff_ms_ * (attempt - 1)));
    httplib::Client client(base_url_);
    client.set_connection_timeout(5, 0);
    client.set_read_timeout(30, 0);
    auto resp = client.Post("/v1/augment", payload, "application/json");
    if (!resp) {
      last_error = "no response (" + httplib::to_string(resp.error()) + ")";
      continue;
    }
    if (resp->status != 200) {
      last_error = "status " + std::to_string(resp->status);
      continue;
    }
    try {
      auto parsed = nlohmann::json::parse(resp->body);
      if (!parsed.contains("text") || !parsed["text"].is_string()) {
        last_error = "response has no text field";
        continue;
      }
      return parsed["text"].get<std::string>();
    } catch (const nlohmann::json::parse_error& e) {
      last_error = std::string("bad response JSON: ") + e.what();
      continue;
    }
  }
  throw Error(ErrorCode::InputError,
              "augmentation service failed after " +
                  std::to_string(max_attempts_) + " attempts: " + last_error);
}

std::unique_ptr<ContextualClient> make_contextual_client_from_env() {
  const char* url = std::getenv("AUGMENT_SERVICE_URL");
  if (url && *url)
    return std::make_unique<HttpContextualClient>(std::string(url));
  return std::make_unique<StubContextualClient>();
}

}  // namespace svaug
