#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tot/core.hpp"

namespace tot {

/// Outcome of a validity check with a human-readable reason on failure.
struct Verdict {
  bool ok = true;
  std::string reason;

  static Verdict pass() { return {}; }
  static Verdict fail(std::string why) { return {false, std::move(why)}; }
  explicit operator bool() const noexcept { return ok; }
};

/// A desk-scale problem instance with a recoverable world state.
///
/// Domains are immutable after construction; every query replays the
/// thought sequence from the initial configuration.
class Domain {
 public:
  virtual ~Domain() = default;

  virtual std::string_view name() const = 0;

  /// The problem prompt z0.
  virtual const std::string& prompt() const = 0;
  State initial_state() const { return State(prompt()); }

  /// Instruction appended to the rendered state when asking for a next step.
  virtual std::string step_instruction() const = 0;

  /// Syntactic membership in the action schema, ignoring the current state.
  virtual bool accepts_action(std::string_view text) const = 0;

  /// True iff every thought parses and applies in sequence.
  virtual Verdict validate(const State& s) const = 0;

  /// Deterministic or simulator goal test. Invalid states are never goals.
  virtual bool is_goal(const State& s) const = 0;

  /// Every applicable next thought, in the domain's priority order.
  /// Throws InvalidStateError when `s` is invalid.
  virtual std::vector<std::string> legal_thoughts(const State& s) const = 0;

  /// Well-formed thoughts that violate the current state (used for noise).
  virtual std::vector<std::string> distractor_thoughts(const State& s) const = 0;

  /// Length of the shortest continuation reaching a goal; nullopt when no
  /// goal is reachable. Throws InvalidStateError when `s` is invalid.
  virtual std::optional<int> distance_to_goal(const State& s) const = 0;

  /// Canonical rendering of the world configuration `s` induces.
  /// Throws InvalidStateError when `s` is invalid.
  virtual std::optional<std::string> world_key(const State& s) const = 0;

  WorldProjector projector() const {
    return [this](const State& s) { return world_key(s); };
  }
};

}  // namespace tot
