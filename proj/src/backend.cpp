#include "tot/backend.hpp"

#include <algorithm>
#include <cctype>

#include "tot/errors.hpp"

namespace tot {

void Decoding::validate() const {
  if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
  if (top_k && *top_k < 1) throw ConfigError("topK must be >= 1");
  if (top_p && (*top_p <= 0.0 || *top_p > 1.0)) throw ConfigError("topP must lie in (0, 1]");
  if (n < 1) throw ConfigError("n must be >= 1");
  if (max_tokens < 1) throw ConfigError("maxTokens must be >= 1");
  if (stop.empty()) throw ConfigError("stop must list at least one delimiter");
}

std::string_view to_string(Interface which) {
  switch (which) {
    case Interface::generate: return "generate";
    case Interface::evaluate: return "evaluate";
    case Interface::judge_goal: return "judgeGoal";
    case Interface::judge_valid: return "judgeValid";
  }
  return "unknown";
}

Interface interface_from_string(std::string_view text) {
  for (Interface which : {Interface::generate, Interface::evaluate, Interface::judge_goal, Interface::judge_valid}) {
    if (to_string(which) == text) return which;
  }
  throw ParseError("unknown backend interface '" + std::string(text) + "'");
}

std::string truncate_at_stop(std::string_view text, const std::vector<std::string>& stop) {
  std::size_t cut = text.size();
  for (const std::string& delim : stop) {
    if (delim.empty()) continue;
    cut = std::min(cut, text.find(delim));
  }
  return std::string(text.substr(0, cut));
}

bool parse_boolean_reply(std::string_view text) {
  std::size_t b = 0;
  while (b < text.size() && !std::isalpha(static_cast<unsigned char>(text[b]))) ++b;
  std::size_t e = b;
  while (e < text.size() && std::isalpha(static_cast<unsigned char>(text[e]))) ++e;
  std::string word(text.substr(b, e - b));
  std::transform(word.begin(), word.end(), word.begin(), [](unsigned char c) { return std::tolower(c); });
  if (word == "true" || word == "yes") return true;
  if (word == "false" || word == "no") return false;
  throw EvaluationError("expected True or False, got '" + std::string(text) + "'");
}

bool test_goal(Backend& backend, const State& s, const CallSite& site, Usage* usage) {
  TextReply reply = backend.judge_goal(s, site);
  if (usage) *usage += reply.usage;
  return parse_boolean_reply(reply.text);
}

bool validate_state(Backend& backend, const State& s, const CallSite& site, Usage* usage) {
  TextReply reply = backend.judge_valid(s, site);
  if (usage) *usage += reply.usage;
  return parse_boolean_reply(reply.text);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
  auto mix = [](std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(seed);
  for (std::uint64_t part : {a, b, c, d}) h = mix(h ^ part);
  return h;
}

}  // namespace tot
