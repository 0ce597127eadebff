#pragma once

// Chat-completion client. The wire contract is documented in docs/http_wire.md.

#include <chrono>
#include <functional>
#include <string>

#include <nlohmann/json.hpp>

#include "tot/backend.hpp"

namespace tot {

struct HttpOptions {
  /// Full URL of the chat-completion endpoint, e.g.
  /// "http://127.0.0.1:8000/v1/chat/completions".
  std::string endpoint;
  std::string model = "default";
  /// Sent as "Authorization: Bearer <token>" when non-empty.
  std::string api_key;
  std::chrono::milliseconds timeout{30'000};
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  /// Decoding used for evaluation and judgement queries.
  int judge_max_tokens = 16;

  /// Reads TOT_ENDPOINT, TOT_MODEL and TOT_API_KEY. Throws ConfigError when
  /// no endpoint is configured.
  static HttpOptions from_environment();
};

/// {model, messages, temperature, top_p, n, max_tokens, stop, logprobs}.
nlohmann::json build_chat_payload(const std::string& model, const std::string& content, const Decoding& decoding,
                                  bool logprobs);

/// Parses a chat-completion reply. Completions are cut at the first stop
/// delimiter; logprobs are summed from choices[i].logprobs.content when
/// requested and present. Throws BackendError(malformed) on schema mismatch.
BackendReply parse_chat_reply(const nlohmann::json& body, const Decoding& decoding, bool want_logprobs);

class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpOptions options);

  /// Replaces std::this_thread::sleep_for between retries (tests).
  void set_sleeper(std::function<void(std::chrono::milliseconds)> sleeper) { sleeper_ = std::move(sleeper); }

  /// POSTs one chat-completion request with bounded exponential backoff.
  BackendReply complete_chat(const std::string& content, const Decoding& decoding, bool want_logprobs);

  BackendReply generate(const State& s, const GenerationRequest& req, const CallSite& site) override;
  TextReply evaluate(const State& s, const CallSite& site) override;
  TextReply judge_goal(const State& s, const CallSite& site) override;
  TextReply judge_valid(const State& s, const CallSite& site) override;

 private:
  TextReply ask(const State& s, std::string_view instruction);
  nlohmann::json post_once(const nlohmann::json& payload);

  HttpOptions options_;
  std::string origin_;
  std::string path_;
  std::function<void(std::chrono::milliseconds)> sleeper_;
};

}  // namespace tot
