#include "tot/http_backend.hpp"

#include <cstdlib>
#include <regex>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "tot/errors.hpp"

namespace tot {

using nlohmann::json;

HttpOptions HttpOptions::from_environment() {
  HttpOptions options;
  if (const char* endpoint = std::getenv("TOT_ENDPOINT")) options.endpoint = endpoint;
  if (const char* model = std::getenv("TOT_MODEL")) options.model = model;
  if (const char* key = std::getenv("TOT_API_KEY")) options.api_key = key;
  if (options.endpoint.empty()) throw ConfigError("TOT_ENDPOINT is not set");
  return options;
}

json build_chat_payload(const std::string& model, const std::string& content, const Decoding& decoding,
                        bool logprobs) {
  json payload = {
      {"model", model},
      {"messages", json::array({{{"role", "user"}, {"content", content}}})},
      {"temperature", decoding.temperature},
      {"n", decoding.n},
      {"max_tokens", decoding.max_tokens},
      {"stop", decoding.stop},
      {"logprobs", logprobs},
  };
  if (decoding.top_p) payload["top_p"] = *decoding.top_p;
  if (decoding.presence_penalty != 0.0) payload["presence_penalty"] = decoding.presence_penalty;
  return payload;
}

namespace {

BackendError malformed(const std::string& what) {
  return BackendError(BackendError::Kind::malformed, "malformed chat reply: " + what, false);
}

long usage_field(const json& usage, const char* name, long fallback) {
  if (!usage.contains(name)) return fallback;
  if (!usage[name].is_number_integer() || usage[name].get<long>() < 0) {
    throw malformed(std::string("usage.") + name + " is not a non-negative integer");
  }
  return usage[name].get<long>();
}

}  // namespace

BackendReply parse_chat_reply(const json& body, const Decoding& decoding, bool want_logprobs) {
  if (!body.is_object() || !body.contains("choices") || !body["choices"].is_array()) {
    throw malformed("missing choices array");
  }
  BackendReply reply;
  long counted = 0;
  for (const json& choice : body["choices"]) {
    if (!choice.contains("message") || !choice["message"].contains("content") ||
        !choice["message"]["content"].is_string()) {
      throw malformed("choice without message.content");
    }
    Completion c;
    c.text = truncate_at_stop(choice["message"]["content"].get<std::string>(), decoding.stop);
    c.token_count = count_tokens(c.text);
    const json* lp = choice.contains("logprobs") && choice["logprobs"].is_object() &&
                             choice["logprobs"].contains("content") && choice["logprobs"]["content"].is_array()
                         ? &choice["logprobs"]["content"]
                         : nullptr;
    if (lp && !lp->empty()) {
      double sum = 0.0;
      for (const json& token : *lp) {
        if (!token.contains("logprob") || !token["logprob"].is_number()) throw malformed("token without logprob");
        sum += token["logprob"].get<double>();
      }
      c.token_count = static_cast<int>(lp->size());
      if (want_logprobs) c.logprob = std::min(sum, 0.0);
    }
    counted += c.token_count;
    reply.completions.push_back(std::move(c));
    if (static_cast<int>(reply.completions.size()) == decoding.n) break;
  }
  const json usage = body.contains("usage") && body["usage"].is_object() ? body["usage"] : json::object();
  reply.usage.prompt_tokens = usage_field(usage, "prompt_tokens", 0);
  reply.usage.completion_tokens = usage_field(usage, "completion_tokens", counted);
  return reply;
}

HttpBackend::HttpBackend(HttpOptions options) : options_(std::move(options)) {
  static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(options_.endpoint, m, url)) {
    throw ConfigError("endpoint must be an http(s) URL: '" + options_.endpoint + "'");
  }
  origin_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/v1/chat/completions";
  if (options_.max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
  sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

json HttpBackend::post_once(const json& payload) {
  httplib::Client client(origin_);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  httplib::Headers headers;
  if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

  auto res = client.Post(path_, headers, payload.dump(), "application/json");
  if (!res) {
    throw BackendError(BackendError::Kind::transport, "transport failure: " + httplib::to_string(res.error()), true);
  }
  if (res->status >= 400) {
    const bool overflow = res->status == 400 && res->body.find("context") != std::string::npos;
    if (overflow) {
      throw BackendError(BackendError::Kind::context_overflow, "context overflow: " + res->body, false, res->status);
    }
    const bool retryable = res->status == 408 || res->status == 429 || res->status >= 500;
    throw BackendError(BackendError::Kind::status, "HTTP " + std::to_string(res->status) + ": " + res->body,
                       retryable, res->status);
  }
  try {
    return json::parse(res->body);
  } catch (const json::parse_error& e) {
    throw malformed(e.what());
  }
}

BackendReply HttpBackend::complete_chat(const std::string& content, const Decoding& decoding, bool want_logprobs) {
  const json payload = build_chat_payload(options_.model, content, decoding, want_logprobs);
  auto backoff = options_.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    try {
      return parse_chat_reply(post_once(payload), decoding, want_logprobs);
    } catch (const BackendError& e) {
      if (!e.retryable() || attempt >= options_.max_attempts) throw;
    }
    sleeper_(backoff);
    backoff *= 2;
  }
}

BackendReply HttpBackend::generate(const State&, const GenerationRequest& req, const CallSite&) {
  return complete_chat(req.rendered_state + "\n" + req.instruction, req.decoding, req.want_logprobs);
}

TextReply HttpBackend::ask(const State& s, std::string_view instruction) {
  Decoding decoding;
  decoding.temperature = 0.0;
  decoding.max_tokens = options_.judge_max_tokens;
  BackendReply reply = complete_chat(render_state(s) + "\n" + std::string(instruction), decoding, false);
  if (reply.completions.empty()) throw malformed("no completion for a judgement query");
  return TextReply{reply.completions.front().text, reply.usage};
}

TextReply HttpBackend::evaluate(const State& s, const CallSite&) { return ask(s, kEvaluateInstruction); }
TextReply HttpBackend::judge_goal(const State& s, const CallSite&) { return ask(s, kGoalInstruction); }
TextReply HttpBackend::judge_valid(const State& s, const CallSite&) { return ask(s, kValidInstruction); }

}  // namespace tot
