#include "tot/game24.hpp"

#include <algorithm>
#include <regex>
#include <sstream>

#include "tot/errors.hpp"

namespace tot::game24 {

std::string format_number(const Rational& value) {
  if (value.denominator() == 1) return std::to_string(value.numerator());
  return std::to_string(value.numerator()) + "/" + std::to_string(value.denominator());
}

namespace {

std::int64_t parse_int(std::string_view text, std::string_view whole) {
  if (text.empty()) throw ParseError("not a number: '" + std::string(whole) + "'");
  std::size_t i = 0;
  bool negative = false;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    i = 1;
  }
  if (i == text.size()) throw ParseError("not a number: '" + std::string(whole) + "'");
  std::int64_t value = 0;
  for (; i < text.size(); ++i) {
    if (text[i] < '0' || text[i] > '9') throw ParseError("not a number: '" + std::string(whole) + "'");
    if (value > 100'000'000'000'000LL) throw ParseError("number out of range: '" + std::string(whole) + "'");
    value = value * 10 + (text[i] - '0');
  }
  return negative ? -value : value;
}

std::string normalize_operators(std::string_view text) {
  std::string out(text);
  auto replace_all = [&out](const std::string& from, const std::string& to) {
    for (std::size_t pos = out.find(from); pos != std::string::npos; pos = out.find(from, pos + to.size())) {
      out.replace(pos, from.size(), to);
    }
  };
  replace_all("\xC3\x97", "*");  // ×
  replace_all("\xC3\xB7", "/");  // ÷
  replace_all("\xE2\x88\x92", "-");  // −
  return out;
}

std::vector<Rational> sorted(std::vector<Rational> values) {
  std::sort(values.begin(), values.end());
  return values;
}

std::string render_numbers(const std::vector<Rational>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ' ';
    out += format_number(values[i]);
  }
  return out;
}

constexpr char kOps[] = {'+', '-', '*', '/'};

}  // namespace

Rational parse_number(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_int(text, text));
  const auto num = parse_int(text.substr(0, slash), text);
  const auto den = parse_int(text.substr(slash + 1), text);
  if (den == 0) throw ParseError("zero denominator: '" + std::string(text) + "'");
  return Rational(num, den);
}

std::string render_step(const Step& step) {
  std::string out = format_number(step.lhs);
  out += ' ';
  out += step.op;
  out += ' ';
  out += format_number(step.rhs);
  out += " = ";
  out += format_number(step.result);
  out += " (left: ";
  out += render_numbers(step.left);
  out += ")";
  return out;
}

Step parse_step(std::string_view text) {
  static const std::regex pattern(
      R"(^\s*(-?[0-9]+(?:/[0-9]+)?)\s*([-+*/xX])\s*(-?[0-9]+(?:/[0-9]+)?)\s*=\s*(-?[0-9]+(?:/[0-9]+)?)\s*\(\s*left\s*:\s*([^)]*)\)\s*\.?\s*$)",
      std::regex::icase);
  const std::string normalized = normalize_operators(text);
  std::smatch m;
  if (!std::regex_match(normalized, m, pattern)) {
    throw ParseError("not an arithmetic step: '" + std::string(text) + "'");
  }
  Step step;
  step.lhs = parse_number(m[1].str());
  step.op = m[2].str()[0];
  if (step.op == 'x' || step.op == 'X') step.op = '*';
  step.rhs = parse_number(m[3].str());
  step.result = parse_number(m[4].str());
  std::istringstream left(m[5].str());
  for (std::string token; left >> token;) step.left.push_back(parse_number(token));
  return step;
}

std::optional<Rational> apply_op(const Rational& a, char op, const Rational& b) {
  switch (op) {
    case '+': return a + b;
    case '-': return a - b;
    case '*': return a * b;
    case '/':
      if (b.numerator() == 0) return std::nullopt;
      return a / b;
    default: return std::nullopt;
  }
}

Game24State::Game24State(std::vector<Rational> numbers) : remaining_(sorted(std::move(numbers))) {}

Game24State Game24State::apply(const Step& step) const {
  std::vector<Rational> rest = remaining_;
  for (const Rational& operand : {step.lhs, step.rhs}) {
    auto it = std::find(rest.begin(), rest.end(), operand);
    if (it == rest.end()) throw PreconditionError("Remaining(" + format_number(operand) + ")");
    rest.erase(it);
  }
  const auto value = apply_op(step.lhs, step.op, step.rhs);
  if (!value) throw PreconditionError("NonZeroDivisor(" + format_number(step.rhs) + ")");
  if (*value != step.result) {
    throw PreconditionError("Equals(" + format_number(step.lhs) + " " + step.op + " " +
                            format_number(step.rhs) + ", " + format_number(step.result) + ")");
  }
  rest.push_back(*value);
  Game24State next(std::move(rest));
  if (sorted(step.left) != next.remaining_) {
    throw PreconditionError("Left(" + render_numbers(next.remaining_) + ")");
  }
  next.derivation_ = derivation_;
  next.derivation_.push_back(render_step(step));
  return next;
}

std::vector<std::pair<std::string, Game24State>> legal_steps(const Game24State& st) {
  std::vector<std::pair<std::string, Game24State>> out;
  const auto& nums = st.remaining();
  std::vector<std::string> seen;
  for (std::size_t i = 0; i < nums.size(); ++i) {
    for (std::size_t j = i + 1; j < nums.size(); ++j) {
      const std::pair<Rational, Rational> orders[] = {{nums[i], nums[j]}, {nums[j], nums[i]}};
      for (char op : kOps) {
        const bool commutative = op == '+' || op == '*';
        for (int order = 0; order < (commutative ? 1 : 2); ++order) {
          const auto& [a, b] = orders[order];
          const auto value = apply_op(a, op, b);
          if (!value) continue;
          std::vector<Rational> rest;
          for (std::size_t k = 0; k < nums.size(); ++k) {
            if (k != i && k != j) rest.push_back(nums[k]);
          }
          rest.push_back(*value);
          Step step{a, op, b, *value, sorted(rest)};
          std::string text = render_step(step);
          if (std::find(seen.begin(), seen.end(), text) != seen.end()) continue;
          seen.push_back(text);
          out.emplace_back(text, st.apply(step));
        }
      }
    }
  }
  return out;
}

bool goal_test(const Game24State& st, const Rational& target) {
  return st.remaining().size() == 1 && st.remaining().front() == target;
}

Game24Domain::Game24Domain(std::vector<Rational> numbers, Rational target)
    : numbers_(sorted(std::move(numbers))), target_(target) {
  if (numbers_.size() < 2) throw InvalidArgument("game24 needs at least two numbers");
  std::string input;
  for (std::size_t i = 0; i < numbers_.size(); ++i) {
    if (i) input += ' ';
    input += format_number(numbers_[i]);
  }
  prompt_ = "Use numbers and basic arithmetic operations (+ - * /) to obtain " + format_number(target_) +
            ". Each step, you are only allowed to choose two of the remaining numbers to obtain a new "
            "number.\nInput: " +
            input;
}

std::string Game24Domain::step_instruction() const {
  return "Give the next step as `a op b = c (left: remaining numbers)'.";
}

bool Game24Domain::accepts_action(std::string_view text) const {
  try {
    parse_step(text);
    return true;
  } catch (const ParseError&) {
    return false;
  }
}

Game24State Game24Domain::replay(const State& s) const {
  Game24State st(numbers_);
  std::size_t depth = 0;
  for (const Thought& z : s.thoughts()) {
    ++depth;
    try {
      st = st.apply(parse_step(z.text()));
    } catch (const ParseError& e) {
      throw InvalidStateError("step " + std::to_string(depth) + ": " + e.what());
    } catch (const PreconditionError& e) {
      throw InvalidStateError("step " + std::to_string(depth) + ": " + e.fact() + " fails");
    }
  }
  return st;
}

Verdict Game24Domain::validate(const State& s) const {
  try {
    replay(s);
    return Verdict::pass();
  } catch (const InvalidStateError& e) {
    return Verdict::fail(e.what());
  }
}

bool Game24Domain::is_goal(const State& s) const {
  try {
    return goal_test(replay(s), target_);
  } catch (const InvalidStateError&) {
    return false;
  }
}

std::vector<std::string> Game24Domain::legal_thoughts(const State& s) const {
  std::vector<std::string> out;
  for (auto& [text, next] : legal_steps(replay(s))) out.push_back(std::move(text));
  return out;
}

std::vector<std::string> Game24Domain::distractor_thoughts(const State& s) const {
  // Same operands and operator as a legal step, off-by-one result.
  const Game24State st = replay(s);
  std::vector<std::string> out;
  for (const auto& [text, next] : legal_steps(st)) {
    Step step = parse_step(text);
    step.result += 1;
    std::vector<Rational> rest = st.remaining();
    rest.erase(std::find(rest.begin(), rest.end(), step.lhs));
    rest.erase(std::find(rest.begin(), rest.end(), step.rhs));
    rest.push_back(step.result);
    step.left = sorted(rest);
    out.push_back(render_step(step));
  }
  return out;
}

bool Game24Domain::solvable(const std::vector<Rational>& numbers) const {
  const std::vector<Rational> key_numbers = sorted(numbers);
  const std::string key = render_numbers(key_numbers);
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = solvable_cache_.find(key); it != solvable_cache_.end()) return it->second;
  }
  bool result = false;
  const Game24State st(key_numbers);
  if (key_numbers.size() == 1) {
    result = key_numbers.front() == target_;
  } else {
    for (const auto& [text, next] : legal_steps(st)) {
      if (solvable(next.remaining())) {
        result = true;
        break;
      }
    }
  }
  std::lock_guard lock(cache_mutex_);
  solvable_cache_.emplace(key, result);
  return result;
}

std::optional<int> Game24Domain::distance_to_goal(const State& s) const {
  const Game24State st = replay(s);
  if (!solvable(st.remaining())) return std::nullopt;
  return static_cast<int>(st.remaining().size()) - 1;
}

std::optional<std::string> Game24Domain::world_key(const State& s) const {
  return render_numbers(replay(s).remaining());
}

}  // namespace tot::game24
