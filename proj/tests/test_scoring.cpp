#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "support.hpp"
#include "tot/errors.hpp"
#include "tot/scoring.hpp"

using namespace tot;

namespace {

State with_logprobs(const std::vector<std::pair<std::string, double>>& steps) {
  std::vector<Thought> zs;
  for (const auto& [t, lp] : steps) zs.push_back(Thought(t, count_tokens(t), lp));
  return State("p", std::move(zs));
}

/// Evaluator answering a fixed text.
class FixedEvaluator final : public Backend {
 public:
  explicit FixedEvaluator(std::string reply) : reply_(std::move(reply)) {}
  int calls = 0;
  BackendReply generate(const State&, const GenerationRequest&, const CallSite&) override { return {}; }
  TextReply evaluate(const State&, const CallSite&) override {
    ++calls;
    return {reply_, {}};
  }
  TextReply judge_goal(const State&, const CallSite&) override { return {}; }
  TextReply judge_valid(const State&, const CallSite&) override { return {}; }

 private:
  std::string reply_;
};

HeuristicModel value_model(ScaleKind kind, Inversion inv) {
  HeuristicModel h;
  h.kind = ScalarValue{ValueScale{kind, 0.0, 10.0}, std::nullopt};
  h.inversion = inv;
  return h;
}

}  // namespace

TEST_CASE("path cost models") {
  const auto d = fixture::case_study_domain();
  const State s2 = fixture::with(*d, {fixture::z1, fixture::z2, fixture::z3_2});
  CHECK(path_cost(s2, UniformCost{}) == 3.0);
  CHECK(path_cost(s2, NoCost{}) == 0.0);

  const State s = with_logprobs({{"a b c", -1.0}, {"d e f", -2.0}});
  CHECK(path_cost(s, NllCost{false}) == 3.0);
  CHECK(path_cost(s, NllCost{true}) == 0.5);
  CHECK(path_cost(State("p"), NllCost{true}) == 0.0);
  try {
    path_cost(fixture::with(*d, {fixture::z1}), NllCost{});
    FAIL("expected a scoring error");
  } catch (const ScoringError& e) {
    CHECK(std::string(e.what()).find("depth 1") != std::string::npos);
  }
  CHECK(cost_tag(NllCost{}) == "G3");
}

TEST_CASE("success inversions") {
  for (auto inv : {Inversion::reciprocal, Inversion::neg_log}) CHECK(invert_success(1.0, inv, 1e-6) == 0.0);
  CHECK(invert_success(0.5, Inversion::reciprocal, 1e-6) == 1.0);
  CHECK(invert_success(0.5, Inversion::neg_log, 1e-6) == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(invert_success(0.0, Inversion::reciprocal, 1e-6) == doctest::Approx(999999.0));
  CHECK(invert_success(0.25, Inversion::identity, 1e-6) == 0.25);
  CHECK(inversion_from_string("negLog") == Inversion::neg_log);
  CHECK_THROWS_AS(inversion_from_string("square"), ConfigError);
  CHECK_THROWS_AS(invert_success(0.5, Inversion::reciprocal, 0.0), InvalidArgument);
}

TEST_CASE("categorical mapping") {
  const CategoricalMapping m;
  CHECK(categorical_to_score("sure", m) / m.max_value() == 1.0);
  CHECK(categorical_to_score("impossible", m) / m.max_value() == 0.0);
  CHECK(categorical_to_score("Maybe", m) / m.max_value() == 0.5);
  CHECK(categorical_to_score("I think this is likely impossible", m) == 0.0);
  CHECK_THROWS_AS(categorical_to_score("perhaps", m), EvaluationError);
}

TEST_CASE("scalar reply parsing") {
  CHECK(parse_scalar_reply("About 3 steps") == 3.0);
  CHECK(parse_scalar_reply("-2.5e1") == -25.0);
  CHECK(std::isinf(*parse_scalar_reply("inf")));
  CHECK(std::isinf(*parse_scalar_reply("Infinity, cannot solve in 3")));
  CHECK_FALSE(parse_scalar_reply("no idea"));
}

TEST_CASE("sequence probability") {
  CHECK(sequence_probability(State("p")) == 1.0);
  CHECK(sequence_probability(with_logprobs({{"a", -1.0}, {"b", -2.0}})) == doctest::Approx(0.0497871));
  CHECK_THROWS_AS(sequence_probability(State("p", {Thought::from_text("a")})), ScoringError);
}

TEST_CASE("probability ranking equals unnormalised NLL ranking") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> lp(-4.0, 0.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<State> states;
    for (int i = 0; i < 12; ++i) {
      std::vector<std::pair<std::string, double>> steps;
      const int depth = static_cast<int>(rng() % 5);
      for (int k = 0; k < depth; ++k) steps.emplace_back("t", -static_cast<double>(rng() % 4) / 2.0);
      if (trial % 2) steps.emplace_back("u", lp(rng));
      states.push_back(with_logprobs(steps));
    }
    for (const auto& a : states) {
      for (const auto& b : states) {
        const double ca = path_cost(a, NllCost{}), cb = path_cost(b, NllCost{});
        const double pa = sequence_probability(a), pb = sequence_probability(b);
        CHECK((ca < cb) == (pa > pb));
        CHECK((ca == cb) == (pa == pb));
      }
    }
  }
}

TEST_CASE("heuristic model validation") {
  HeuristicModel h = value_model(ScaleKind::cost, Inversion::reciprocal);
  CHECK_THROWS_AS(h.validate(), ConfigError);
  h.inversion = Inversion::identity;
  CHECK_NOTHROW(h.validate());
  h = value_model(ScaleKind::success, Inversion::identity);
  CHECK_THROWS_AS(h.validate(), ConfigError);
  h.kind = External{};
  h.inversion = Inversion::reciprocal;
  CHECK_THROWS_AS(h.validate(), ConfigError);
  h.kind = ThoughtProbability{};
  CHECK_NOTHROW(h.validate());
  CHECK(heuristic_tag(h) == "H2");
}

TEST_CASE("worked-example scores") {
  const auto d = fixture::case_study_domain();
  OracleBackend oracle(*d, fixture::case_study_script());
  const auto h = value_model(ScaleKind::cost, Inversion::identity);

  const State s2 = fixture::with(*d, {fixture::z1, fixture::z2, fixture::z3_2});
  const Score a = score_state(s2, true, UniformCost{}, h, Combiner::additive, &oracle, {});
  CHECK(a.g == 3.0);
  CHECK(a.h_cost == 0.0);
  CHECK(a.f == 3.0);

  const State s3 = fixture::with(*d, {fixture::z1, fixture::z2, fixture::z3_3});
  const Score b = score_state(s3, false, UniformCost{}, h, Combiner::additive, &oracle, {});
  CHECK(b.g == 3.0);
  CHECK(b.h_cost == 1.0);
  CHECK(b.h_success == 0.5);
  CHECK(b.f == 4.0);
}

TEST_CASE("goal states skip the evaluator") {
  FixedEvaluator ev("7");
  const auto h = value_model(ScaleKind::success, Inversion::reciprocal);
  const Score s = score_state(State("p", {Thought::from_text("x")}), true, UniformCost{}, h, Combiner::additive,
                              &ev, {});
  CHECK(ev.calls == 0);
  CHECK(s.h_success == 1.0);
  CHECK(s.h_cost == 0.0);
}

TEST_CASE("success-scale replies are rescaled and clipped") {
  const auto h = value_model(ScaleKind::success, Inversion::reciprocal);
  auto hs = [&](const std::string& reply) {
    FixedEvaluator ev(reply);
    return score_state(State("p"), false, NoCost{}, h, Combiner::additive, &ev, {}).h_success;
  };
  CHECK(hs("5") == 0.5);
  CHECK(hs("15") == 1.0);
  CHECK(hs("-3") == 0.0);
}

TEST_CASE("cost-scale replies derive hSuccess") {
  const auto h = value_model(ScaleKind::cost, Inversion::identity);
  FixedEvaluator inf("inf");
  const Score s = score_state(State("p"), false, UniformCost{}, h, Combiner::additive, &inf, {});
  CHECK(s.h_success == 0.0);
  CHECK(s.h_cost == doctest::Approx(999999.0));
  FixedEvaluator three("3");
  CHECK(score_state(State("p"), false, UniformCost{}, h, Combiner::additive, &three, {}).h_success == 0.25);
}

TEST_CASE("unreadable replies score worst with a warning") {
  FixedEvaluator ev("I am not sure");
  const auto h = value_model(ScaleKind::success, Inversion::reciprocal);
  const Score s = score_state(State("p"), false, NoCost{}, h, Combiner::additive, &ev, {});
  CHECK(s.h_success == 0.0);
  CHECK(s.warning);

  HeuristicModel cat;
  cat.kind = ScalarValue{{}, CategoricalMapping{}};
  FixedEvaluator odd("perhaps");
  CHECK(score_state(State("p"), false, NoCost{}, cat, Combiner::additive, &odd, {}).warning);
}

TEST_CASE("ratio combiner") {
  CHECK(combine(Combiner::ratio, 2.0, 0.0, 0.25, 1e-6) == 8.0);
  CHECK(combine(Combiner::ratio, 2.0, 0.0, 0.0, 1e-6) == doctest::Approx(2e6));
  CHECK(combine(Combiner::additive, 2.0, 3.0, 0.0, 1e-6) == 5.0);
  HeuristicModel h;
  h.kind = External{[](const State&) { return 0.25; }, ScaleKind::success, "fixed"};
  const Score s = score_state(State("p", {Thought::from_text("a"), Thought::from_text("b")}), false, UniformCost{},
                              h, Combiner::ratio, nullptr, {});
  CHECK(s.f == 8.0);
}

TEST_CASE("evaluator backend failures become evaluation errors") {
  class Down final : public Backend {
   public:
    BackendReply generate(const State&, const GenerationRequest&, const CallSite&) override { return {}; }
    TextReply evaluate(const State&, const CallSite&) override {
      throw BackendError(BackendError::Kind::status, "500", true, 500);
    }
    TextReply judge_goal(const State&, const CallSite&) override { return {}; }
    TextReply judge_valid(const State&, const CallSite&) override { return {}; }
  } down;
  const auto h = value_model(ScaleKind::success, Inversion::reciprocal);
  CHECK_THROWS_AS(score_state(State("p"), false, NoCost{}, h, Combiner::additive, &down, {}), EvaluationError);
}
