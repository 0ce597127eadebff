#pragma once

// Game of 24: combine the input numbers pairwise with + - * / until a single
// number is left. Arithmetic is exact over the rationals.

#include <boost/rational.hpp>

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tot/domain.hpp"

namespace tot::game24 {

using Rational = boost::rational<std::int64_t>;

/// "24", "-2", "2/3".
std::string format_number(const Rational& value);
/// Inverse of format_number. Throws ParseError.
Rational parse_number(std::string_view text);

/// One arithmetic step, rendered as "a op b = c (left: m1 m2 ...)".
struct Step {
  Rational lhs;
  char op = '+';
  Rational rhs;
  Rational result;
  std::vector<Rational> left;
};

std::string render_step(const Step& step);
/// Accepts "/" or "÷" for division and "*", "x" or "×" for multiplication.
/// Throws ParseError.
Step parse_step(std::string_view text);

/// a op b, or nullopt on division by zero.
std::optional<Rational> apply_op(const Rational& a, char op, const Rational& b);

class Game24State {
 public:
  explicit Game24State(std::vector<Rational> numbers);

  /// Remaining numbers in ascending order.
  const std::vector<Rational>& remaining() const noexcept { return remaining_; }
  const std::vector<std::string>& derivation() const noexcept { return derivation_; }

  /// Applies `step`, checking operand membership, arithmetic and the left list.
  /// Throws PreconditionError naming the failed check.
  Game24State apply(const Step& step) const;

 private:
  std::vector<Rational> remaining_;
  std::vector<std::string> derivation_;
};

/// Every distinct step from `st`: one per unordered operand pair and operator,
/// both orders for - and /, division by zero excluded.
std::vector<std::pair<std::string, Game24State>> legal_steps(const Game24State& st);

/// True iff exactly one number remains and it equals `target`.
bool goal_test(const Game24State& st, const Rational& target = Rational(24));

class Game24Domain final : public Domain {
 public:
  explicit Game24Domain(std::vector<Rational> numbers, Rational target = Rational(24));

  const std::vector<Rational>& numbers() const noexcept { return numbers_; }
  const Rational& target() const noexcept { return target_; }

  std::string_view name() const override { return "game24"; }
  const std::string& prompt() const override { return prompt_; }
  std::string step_instruction() const override;
  bool accepts_action(std::string_view text) const override;
  Verdict validate(const State& s) const override;
  bool is_goal(const State& s) const override;
  std::vector<std::string> legal_thoughts(const State& s) const override;
  std::vector<std::string> distractor_thoughts(const State& s) const override;
  std::optional<int> distance_to_goal(const State& s) const override;
  std::optional<std::string> world_key(const State& s) const override;

  /// Replays the thoughts of `s`. Throws InvalidStateError.
  Game24State replay(const State& s) const;

  /// Whether `numbers` can be combined into the target.
  bool solvable(const std::vector<Rational>& numbers) const;

 private:
  std::vector<Rational> numbers_;
  Rational target_;
  std::string prompt_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::string, bool> solvable_cache_;
};

}  // namespace tot::game24
