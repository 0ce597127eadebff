#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tot/blocksworld.hpp"
#include "tot/game24.hpp"
#include "tot/oracle_backend.hpp"
#include "tot/search.hpp"

namespace fixture {

inline const std::string z1 = "Pick block `A' from `B' and place it on the table.";
inline const std::string z2 = "Pick block `B' from `C' and place it on block `A'.";
inline const std::string z3_1 = "Pick block `A' from the table and place it on block `C'.";
inline const std::string z3_2 = "Pick block `C' from the table and place it on block `B'.";
inline const std::string z3_3 = "Pick block `B' from block `A' and place it on the table.";

inline std::shared_ptr<tot::blocks::BlocksworldDomain> case_study_domain() {
  return std::make_shared<tot::blocks::BlocksworldDomain>(
      tot::blocks::BlocksConfig::from_facts({"On(A,B)", "On(B,C)", "On(C,Table)", "Clear(A)"}),
      std::set<std::string>{"On(C,B)"});
}

inline tot::OracleScript case_study_script() {
  tot::OracleScript script;
  script.add({}, {z1});
  script.add({z1}, {z2});
  script.add({z1, z2}, {z3_1, z3_2, z3_3});
  return script;
}

inline tot::State with(const tot::Domain& d, const std::vector<std::string>& thoughts) {
  std::vector<tot::Thought> zs;
  for (const auto& t : thoughts) zs.push_back(tot::Thought::from_text(t));
  return tot::State(d.prompt(), std::move(zs));
}

inline std::shared_ptr<tot::game24::Game24Domain> game24(const std::vector<int>& numbers, int target = 24) {
  std::vector<tot::game24::Rational> xs;
  for (int v : numbers) xs.emplace_back(v);
  return std::make_shared<tot::game24::Game24Domain>(xs, tot::game24::Rational(target));
}

/// Oracle-evaluated best-first components with the steps evaluator on the cost scale.
inline tot::SearchComponents value_components(tot::Backend& backend, int branch) {
  tot::SearchComponents c;
  c.backend = &backend;
  c.proposal.branch = branch;
  c.heuristic.kind = tot::ScalarValue{tot::ValueScale{tot::ScaleKind::cost}, std::nullopt};
  c.heuristic.inversion = tot::Inversion::identity;
  c.goal_test = tot::GoalTestKind::environment;
  return c;
}

/// Cost-scale heuristic that always answers zero; no evaluator calls.
inline tot::HeuristicModel zero_heuristic() {
  tot::HeuristicModel h;
  h.kind = tot::External{[](const tot::State&) { return 0.0; }, tot::ScaleKind::cost, "zero"};
  h.inversion = tot::Inversion::identity;
  return h;
}

}  // namespace fixture
