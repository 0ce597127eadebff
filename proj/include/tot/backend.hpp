#pragma once

/**
 * Model backends.
 *
 * A backend answers the four agent/model queries: propose a next thought,
 * estimate a state's promise, judge whether a state is a solution, and judge
 * whether a partial solution is valid. Backends never touch search state; the
 * search owns the tree and decides what to do with every reply.
 */

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tot/core.hpp"

namespace tot {

struct Usage {
  long prompt_tokens = 0;
  long completion_tokens = 0;

  Usage& operator+=(const Usage& other) {
    prompt_tokens += other.prompt_tokens;
    completion_tokens += other.completion_tokens;
    return *this;
  }
  friend bool operator==(const Usage&, const Usage&) = default;
};

struct Completion {
  std::string text;
  int token_count = 0;
  std::optional<double> logprob;
};

struct BackendReply {
  std::vector<Completion> completions;
  Usage usage;
};

struct Decoding {
  double temperature = 0.7;
  std::optional<int> top_k;
  std::optional<double> top_p;
  int n = 1;
  int max_tokens = 128;
  std::vector<std::string> stop{"\n"};
  double presence_penalty = 0.0;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

struct GenerationRequest {
  std::string rendered_state;
  std::string instruction;
  Decoding decoding;
  bool want_logprobs = true;
  /// When set, ask for a list of this many alternatives in a single reply.
  std::optional<int> enumerate;
};

/// Free-text answer to an evaluation or judgement query.
struct TextReply {
  std::string text;
  Usage usage;
};

/// Identifies a call so that stochastic backends can derive a per-call seed.
struct CallSite {
  NodeId node = 0;
  int draw = 0;
  int attempt = 0;
};

enum class Interface { generate, evaluate, judge_goal, judge_valid };

std::string_view to_string(Interface which);
Interface interface_from_string(std::string_view text);

class Backend {
 public:
  virtual ~Backend() = default;

  virtual BackendReply generate(const State& s, const GenerationRequest& req, const CallSite& site) = 0;
  virtual TextReply evaluate(const State& s, const CallSite& site) = 0;
  virtual TextReply judge_goal(const State& s, const CallSite& site) = 0;
  virtual TextReply judge_valid(const State& s, const CallSite& site) = 0;
};

inline constexpr std::string_view kEvaluateInstruction =
    "How many more moves are needed to finish from here? Reply with one number.";
inline constexpr std::string_view kGoalInstruction = "Does this sequence finish the task? Reply True or False.";
inline constexpr std::string_view kValidInstruction =
    "Is every step so far allowed by the rules? Reply True or False.";

/// Cuts `text` at the earliest occurrence of any stop delimiter.
std::string truncate_at_stop(std::string_view text, const std::vector<std::string>& stop);

/// "True"/"yes" -> true, "False"/"no" -> false (first word, case-insensitive).
/// Throws EvaluationError otherwise.
bool parse_boolean_reply(std::string_view text);

/// Interface 3 and 4 wrappers.
bool test_goal(Backend& backend, const State& s, const CallSite& site, Usage* usage = nullptr);
bool validate_state(Backend& backend, const State& s, const CallSite& site, Usage* usage = nullptr);

/// splitmix64 finaliser; used to derive independent per-call streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0,
                       std::uint64_t d = 0);

}  // namespace tot
