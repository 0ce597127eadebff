#include <doctest.h>

#include <random>

#include "support.hpp"
#include "tot/core.hpp"
#include "tot/errors.hpp"

using namespace tot;

TEST_CASE("thought construction") {
  const Thought z = Thought::from_text("move A to B\n");
  CHECK(z.text() == "move A to B");
  CHECK(z.token_count() == 4);
  CHECK_FALSE(z.logprob());
  CHECK_THROWS_AS(Thought::from_text(""), InvalidArgument);
  CHECK_THROWS_AS(Thought("x", 0), InvalidArgument);
  CHECK_THROWS_AS(Thought("x", 1, 0.5), InvalidArgument);
  CHECK(Thought("x", 1, 0.0).logprob() == 0.0);
  CHECK(count_tokens("  a  b\tc\n") == 3);
}

TEST_CASE("extend state") {
  const State s0("z0");
  const State s1 = extend_state(s0, Thought::from_text("z1"));
  CHECK(s1.depth() == 1);
  CHECK(s1.last().text() == "z1");
  CHECK(s0.depth() == 0);

  const auto d = fixture::case_study_domain();
  const State s = fixture::with(*d, {fixture::z1, fixture::z2});
  const State s2 = extend_state(s, Thought::from_text(fixture::z3_2));
  CHECK(s2 == fixture::with(*d, {fixture::z1, fixture::z2, fixture::z3_2}));

  const Thought a = Thought::from_text("a"), b = Thought::from_text("b");
  CHECK(extend_state(extend_state(s0, a), b) != extend_state(extend_state(s0, b), a));
}

TEST_CASE("render state puts one thought per line") {
  State s("prompt");
  s = extend_state(s, Thought::from_text("one"));
  s = extend_state(s, Thought::from_text("two"));
  CHECK(render_state(s) == "prompt\none\ntwo");
}

TEST_CASE("node status transitions") {
  Node n;
  n.set_status(NodeStatus::expanded);
  CHECK_NOTHROW(n.set_status(NodeStatus::expanded));
  CHECK_THROWS_AS(n.set_status(NodeStatus::open), InvalidArgument);
  CHECK_THROWS_AS(n.set_status(NodeStatus::goal), InvalidArgument);

  for (auto terminal : {NodeStatus::pruned, NodeStatus::invalid, NodeStatus::goal}) {
    Node m;
    m.set_status(terminal);
    for (auto next : {NodeStatus::open, NodeStatus::expanded, NodeStatus::pruned, NodeStatus::invalid,
                      NodeStatus::goal}) {
      CHECK_THROWS_AS(m.set_status(next), InvalidArgument);
    }
  }
}

TEST_CASE("search tree ids and path reconstruction") {
  SearchTree t;
  const NodeId root = t.add_root(State("z0"));
  CHECK(root == 0);
  CHECK(reconstruct_path(t, root).empty());
  CHECK_THROWS_AS(t.add_root(State("again")), InvalidArgument);

  const NodeId a = t.add_child(root, Thought::from_text(fixture::z1));
  const NodeId b = t.add_child(a, Thought::from_text(fixture::z2));
  const NodeId c = t.add_child(b, Thought::from_text(fixture::z3_2));
  CHECK(a == 1);
  CHECK(b == 2);
  CHECK(c == 3);
  CHECK(t.at(c).parent == b);
  CHECK(t.at(b).children == std::vector<NodeId>{c});

  const auto path = reconstruct_path(t, c);
  REQUIRE(path.size() == 3);
  CHECK(path[0].text() == fixture::z1);
  CHECK(path[1].text() == fixture::z2);
  CHECK(path[2].text() == fixture::z3_2);
  CHECK_THROWS_AS(t.at(99), LookupError);
}

TEST_CASE("path length equals depth on random trees") {
  std::mt19937_64 rng(3);
  SearchTree t;
  t.add_root(State("root"));
  for (int i = 0; i < 200; ++i) {
    const NodeId parent = static_cast<NodeId>(rng() % t.size());
    t.add_child(parent, Thought::from_text("t" + std::to_string(i)));
  }
  for (const Node& n : t) {
    CHECK(reconstruct_path(t, n.id).size() == n.depth());
    if (n.parent) CHECK(t.at(*n.parent).depth() + 1 == n.depth());
  }
}

TEST_CASE("budget validation") {
  SearchBudget b;
  CHECK_NOTHROW(b.validate());
  b.max_expansions = 0;
  CHECK_NOTHROW(b.validate());
  b.max_expansions = -1;
  CHECK_THROWS_AS(b.validate(), ConfigError);
  b = {};
  b.max_depth = 0;
  CHECK_THROWS_AS(b.validate(), ConfigError);
}

TEST_CASE("world key without a projector is absent") {
  CHECK_FALSE(world_key(State("poem"), nullptr));
  WorldProjector empty;
  CHECK_FALSE(world_key(State("poem"), &empty));
}
