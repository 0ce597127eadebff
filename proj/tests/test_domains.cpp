#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracles/blocks_bfs.hpp"
#include "oracles/game24_solver.hpp"
#include "support.hpp"
#include "tot/errors.hpp"

using namespace tot;
using namespace tot::blocks;
namespace g24 = tot::game24;

TEST_CASE("parse blocks actions") {
  CHECK(parse_blocks_action("Pick block `A' from `B' and place it on the table.") ==
        BlocksAction{"A", "B", "Table"});
  CHECK(parse_blocks_action("pick block C from the table and place it on block B") ==
        BlocksAction{"C", "Table", "B"});
  CHECK(parse_blocks_action("Pick block \xE2\x80\x98" "A\xE2\x80\x99 from block 'B' and place it on block \"C\"") ==
        BlocksAction{"A", "B", "C"});
  CHECK_THROWS_AS(parse_blocks_action("fly block A"), ParseError);
  CHECK_THROWS_AS(parse_blocks_action("fly block A to the moon"), ParseError);
  CHECK_THROWS_AS(BlocksAction::make("X", "Table", "Table"), InvalidArgument);
  CHECK_THROWS_AS(BlocksAction::make("X", "Y", "X"), InvalidArgument);
  CHECK_FALSE(valid_block_name("table"));
  CHECK_FALSE(valid_block_name("9a"));
  CHECK(valid_block_name("B12"));
}

TEST_CASE("rendered actions parse back") {
  for (const BlocksAction& a : {BlocksAction{"A", "B", "Table"}, BlocksAction{"C", "Table", "B"},
                                BlocksAction{"Q7", "R", "S"}}) {
    CHECK(parse_blocks_action(render_blocks_action(a)) == a);
  }
}

TEST_CASE("apply blocks actions") {
  const auto init = BlocksConfig::from_facts({"On(A,B)", "On(B,C)", "On(C,Table)", "Clear(A)"});
  const auto after = apply_blocks_action(init, {"A", "B", "Table"});
  CHECK(after.facts() ==
        std::set<std::string>{"On(A,Table)", "On(B,C)", "On(C,Table)", "Clear(A)", "Clear(B)"});

  const auto s2 = apply_blocks_action(after, {"B", "C", "A"});
  try {
    apply_blocks_action(s2, {"A", "Table", "C"});
    FAIL("expected a precondition error");
  } catch (const PreconditionError& e) {
    CHECK(e.fact() == "Clear(A)");
  }
  CHECK(describe_violation("Clear(A)") == "block A is not clear");
  CHECK_THROWS_AS(BlocksConfig::from_facts({"On(A,B)", "On(B,A)"}), InvalidArgument);
  CHECK_THROWS_AS(BlocksConfig::from_facts({"On(A,B)", "On(B,Table)", "Clear(B)"}), InvalidArgument);
}

TEST_CASE("blocks goal test") {
  const auto d = fixture::case_study_domain();
  CHECK(d->is_goal(fixture::with(*d, {fixture::z1, fixture::z2, fixture::z3_2})));
  CHECK_FALSE(d->is_goal(fixture::with(*d, {fixture::z1, fixture::z2})));
  CHECK_FALSE(d->is_goal(d->initial_state()));
  CHECK_FALSE(d->is_goal(fixture::with(*d, {fixture::z1, fixture::z2, fixture::z3_1})));
  CHECK(blocks_goal_satisfied(d->initial(), {}));
}

TEST_CASE("blocks validator names the failing precondition") {
  const auto d = fixture::case_study_domain();
  CHECK(d->validate(d->initial_state()));
  const Verdict v = d->validate(fixture::with(*d, {fixture::z1, fixture::z2, fixture::z3_1}));
  CHECK_FALSE(v);
  CHECK(v.reason.find("block A is not clear") != std::string::npos);
  CHECK_FALSE(d->validate(fixture::with(*d, {"pick up the red block"})));
}

TEST_CASE("legal blocks actions") {
  const auto init = BlocksConfig::from_facts({"On(A,B)", "On(B,C)", "On(C,Table)"});
  CHECK(enumerate_legal_actions(init) == std::vector<BlocksAction>{{"A", "B", "Table"}});
  CHECK(enumerate_legal_actions(BlocksConfig::from_supports({{"X", "Table"}})).empty());
  CHECK(enumerate_legal_actions(BlocksConfig::from_supports({{"X", "Table"}, {"Y", "Table"}})) ==
        std::vector<BlocksAction>{{"X", "Table", "Y"}, {"Y", "Table", "X"}});
}

TEST_CASE("blocks search agrees with the independent oracle") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 4;
    const auto start = random_config(n, rng);
    const auto target = random_config(n, rng);
    std::set<std::string> goal;
    for (const auto& f : target.facts()) {
      if (f.rfind("On(", 0) == 0) goal.insert(f);
    }
    const auto world = oracle::world_from_supports(start.supports());
    CHECK(enumerate_legal_actions(start).size() == oracle::successors(world).size());
    CHECK(shortest_plan_length(start, goal) == oracle::bfs_plan_length(world, goal));
  }
}

TEST_CASE("blocks world keys match simulated configurations") {
  std::mt19937_64 rng(5);
  const auto d = fixture::case_study_domain();
  std::map<std::string, oracle::World> by_key;
  for (int walk = 0; walk < 60; ++walk) {
    State s = d->initial_state();
    oracle::World w = oracle::world_from_supports(d->initial().supports());
    const int steps = static_cast<int>(rng() % 5);
    for (int i = 0; i < steps; ++i) {
      const auto legal = d->legal_thoughts(s);
      s = extend_state(s, Thought::from_text(legal[rng() % legal.size()]));
    }
    w = oracle::world_from_supports(d->simulate(s).supports());
    const auto key = *d->world_key(s);
    auto [it, fresh] = by_key.emplace(key, w);
    if (!fresh) CHECK(it->second == w);
  }
  for (const auto& [ka, wa] : by_key) {
    for (const auto& [kb, wb] : by_key) CHECK((ka == kb) == (wa == wb));
  }

  // Two orders reaching the same configuration.
  const auto d2 = std::make_shared<BlocksworldDomain>(
      BlocksConfig::from_supports({{"A", "Table"}, {"B", "Table"}, {"C", "Table"}}), std::set<std::string>{});
  const State ab = fixture::with(*d2, {"Pick block `A' from the table and place it on block `B'.",
                                       "Pick block `C' from the table and place it on block `A'."});
  const State other = fixture::with(*d2, {"Pick block `C' from the table and place it on block `A'.",
                                          "Pick block `C' from block `A' and place it on the table.",
                                          "Pick block `A' from the table and place it on block `B'.",
                                          "Pick block `C' from the table and place it on block `A'."});
  CHECK(d2->world_key(ab) == d2->world_key(other));
}

TEST_CASE("game24 numbers and steps") {
  CHECK(g24::format_number(g24::Rational(2, 3)) == "2/3");
  CHECK(g24::parse_number("-2") == g24::Rational(-2));
  CHECK_THROWS_AS(g24::parse_number("two"), ParseError);
  const auto step = g24::parse_step("4 \xC3\x97 6 = 24 (left: 24)");
  CHECK(step.op == '*');
  CHECK(g24::render_step(step) == "4 * 6 = 24 (left: 24)");
  CHECK(g24::parse_step("8 \xC3\xB7 3 = 8/3 (left: 8/3 1)").op == '/');
  CHECK_FALSE(g24::apply_op(g24::Rational(1), '/', g24::Rational(0)));
}

TEST_CASE("game24 legal steps") {
  auto texts = [](const g24::Game24State& st) {
    std::vector<std::string> out;
    for (const auto& [t, next] : g24::legal_steps(st)) out.push_back(t);
    return out;
  };
  const auto four_six = texts(g24::Game24State({g24::Rational(4), g24::Rational(6)}));
  CHECK(std::find(four_six.begin(), four_six.end(), "4 * 6 = 24 (left: 24)") != four_six.end());

  for (const auto& t : texts(g24::Game24State({g24::Rational(1), g24::Rational(0)}))) {
    CHECK(t.find("/ 0 ") == std::string::npos);
  }

  g24::Game24State st({g24::Rational(1), g24::Rational(2), g24::Rational(3), g24::Rational(4)});
  st = st.apply(g24::parse_step("1 * 2 = 2 (left: 2 3 4)"));
  st = st.apply(g24::parse_step("2 * 3 = 6 (left: 4 6)"));
  st = st.apply(g24::parse_step("4 * 6 = 24 (left: 24)"));
  CHECK(g24::goal_test(st));
  CHECK(st.remaining() == std::vector<g24::Rational>{g24::Rational(24)});
}

TEST_CASE("game24 goal test") {
  CHECK(g24::goal_test(g24::Game24State({g24::Rational(24)})));
  CHECK_FALSE(g24::goal_test(g24::Game24State({g24::Rational(23)})));
  CHECK_FALSE(g24::goal_test(g24::Game24State({g24::Rational(24), g24::Rational(1)})));
}

TEST_CASE("game24 validator checks the remaining multiset") {
  const auto d = fixture::game24({4, 9, 10, 13});
  CHECK(d->validate(d->initial_state()));
  CHECK(d->validate(fixture::with(*d, {"13 - 9 = 4 (left: 4 4 10)"})));
  CHECK_FALSE(d->validate(fixture::with(*d, {"13 - 5 = 8 (left: 4 8 9 10)"})));
  CHECK_FALSE(d->validate(fixture::with(*d, {"13 - 9 = 5 (left: 4 5 10)"})));
  CHECK_FALSE(d->validate(fixture::with(*d, {"13 - 9 = 4 (left: 4 10)"})));
  const auto one = fixture::game24({1, 1});
  CHECK_FALSE(one->validate(fixture::with(*one, {"1 - 1 = 0 (left: 0)", "0 / 0 = 0 (left: 0)"})));
}

TEST_CASE("game24 world keys are remaining multisets") {
  const auto d = fixture::game24({1, 2, 3, 4});
  const State a = fixture::with(*d, {"1 + 2 = 3 (left: 3 3 4)"});
  const State b = fixture::with(*d, {"3 * 1 = 3 (left: 2 3 4)", "2 + 1 = 3 (left: 3 3 4)"});
  CHECK(d->world_key(a) != std::nullopt);
  CHECK(d->world_key(fixture::with(*d, {"1 * 3 = 3 (left: 2 3 4)"})) !=
        d->world_key(fixture::with(*d, {"1 + 2 = 3 (left: 3 3 4)"})));
  CHECK_THROWS_AS(d->world_key(b), InvalidStateError);
  const State c = fixture::with(*d, {"4 - 1 = 3 (left: 2 3 3)", "2 + 1 = 3 (left: 3 3)"});
  CHECK_THROWS_AS(d->world_key(c), InvalidStateError);
  const State e = fixture::with(*d, {"2 + 1 = 3 (left: 3 3 4)"});
  CHECK(d->world_key(a) == d->world_key(e));
}

TEST_CASE("game24 solvability matches the brute-force solver") {
  std::mt19937_64 rng(17);
  int solvable = 0;
  for (int i = 0; i < 120; ++i) {
    std::vector<int> xs;
    for (int k = 0; k < 4; ++k) xs.push_back(1 + static_cast<int>(rng() % 13));
    const auto d = fixture::game24(xs);
    const bool expected = oracle::solvable(xs);
    solvable += expected;
    CHECK(d->distance_to_goal(d->initial_state()).has_value() == expected);
  }
  CHECK(solvable > 0);
  CHECK(solvable < 120);
  CHECK_FALSE(fixture::game24({1, 1, 1, 1})->distance_to_goal(State(fixture::game24({1, 1, 1, 1})->prompt())));
}

TEST_CASE("domains never report invalid states as goals") {
  const auto d = fixture::game24({4, 6});
  CHECK_FALSE(d->is_goal(d->initial_state()));
  CHECK(d->is_goal(fixture::with(*d, {"4 * 6 = 24 (left: 24)"})));
  CHECK_FALSE(d->is_goal(fixture::with(*d, {"4 * 5 = 24 (left: 24)"})));
  CHECK_FALSE(d->is_goal(fixture::with(*d, {"4 * 6 = 24 (left: 24 6)"})));
}
