#pragma once

/**
 * Search strategies over the thought tree.
 *
 * Every expansion runs the same pipeline: generate successors, create nodes,
 * filter invalid states and world-state duplicates, goal-test, score, then
 * apply the strategy's pruning. Ties are always broken by node id (creation
 * order). Budget checks happen before each expansion and each backend call.
 */

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tot/backend.hpp"
#include "tot/core.hpp"
#include "tot/domain.hpp"
#include "tot/generation.hpp"
#include "tot/run_log.hpp"
#include "tot/scoring.hpp"

namespace tot {

struct BestFirst {};
struct Beam {
  int width = 5;
};
struct GreedyDfs {
  double threshold = INFINITY;
  int child_limit = 1 << 20;
};
struct Lts {};
struct Mcts {
  double exploration_c = std::sqrt(2.0);
  int iterations = 100;
  /// Extra proposal rounds for a revisited node that still has no children.
  int max_resamples = 2;
};

using Strategy = std::variant<BestFirst, Beam, GreedyDfs, Lts, Mcts>;

/// P1: layer-wide top-k (beam only).
struct BeamPrune {
  int k = 5;
};
/// P2: per-expansion top-b.
struct LocalBranch {
  int b = 3;
};
/// P3: per-expansion f cutoff.
struct LocalThreshold {
  double threshold = INFINITY;
};

using Pruning = std::variant<BeamPrune, LocalBranch, LocalThreshold>;

std::string_view strategy_name(const Strategy& s);
std::string_view pruning_tag(const Pruning& p);

struct StrategyConfig {
  Strategy strategy = BestFirst{};
  std::optional<Pruning> pruning;
  std::uint64_t seed = 0;
  SearchBudget budget;
  /// Keep searching after the first goal and collect every solution found.
  bool collect_all = false;

  /// Throws ConfigError on bad parameters or a strategy/pruning mismatch.
  /// A beam strategy without pruning is given BeamPrune with its width.
  void validate();
};

enum class GoalTestKind { deterministic, llm, environment };
enum class ValidatorKind { none, domain, llm };

std::string_view goal_test_tag(GoalTestKind kind);
std::string_view to_string(ValidatorKind kind);

/// What the search needs to know about the problem.
struct Problem {
  State root{""};
  /// Goal predicate for deterministic and environment goal tests.
  std::function<bool(const State&)> is_goal;
  /// Domain validator (ValidatorKind::domain).
  std::function<Verdict(const State&)> validate;
  /// World-state projection for duplicate detection; may be empty.
  WorldProjector projector;
};

Problem problem_from_domain(const Domain& domain);

struct SearchComponents {
  Backend* backend = nullptr;
  ProposalConfig proposal;
  ConstraintChain constraints;
  CostModel cost = UniformCost{};
  HeuristicModel heuristic;
  Combiner combiner = Combiner::additive;
  GoalTestKind goal_test = GoalTestKind::deterministic;
  ValidatorKind validator = ValidatorKind::domain;
  bool detect_duplicates = true;
};

enum class Outcome { solved, exhausted, budget_exceeded, aborted };

std::string_view to_string(Outcome o);

struct SearchStats {
  long expansions = 0;
  long generated_thoughts = 0;
  long pruned_nodes = 0;
  long rejected_candidates = 0;
  long backend_calls = 0;
  /// Completion tokens over all backend calls.
  long tokens = 0;
  long prompt_tokens = 0;
  long iterations = 0;
  long failed_iterations = 0;
  long evaluation_warnings = 0;
};

struct SearchResult {
  Outcome outcome = Outcome::exhausted;
  /// First goal recognised.
  std::optional<NodeId> goal;
  std::vector<NodeId> solutions;
  SearchStats stats;
  SearchTree tree;
  /// Solution path, or for an unsolved MCTS run the most-visited path.
  std::vector<Thought> plan;
  std::optional<std::string> error;
  RunLog log;
};

SearchResult run_search(const Problem& problem, const StrategyConfig& config, const SearchComponents& components);

struct ScoredId {
  NodeId id;
  double f;
};

/// The k smallest-f entries, ordered by (f, id).
std::vector<NodeId> beam_prune(std::vector<ScoredId> layer, int k);
/// The b smallest-f entries, ordered by (f, id).
std::vector<NodeId> local_branch_prune(std::vector<ScoredId> children, int b);
/// Entries with f <= threshold, in input order.
std::vector<NodeId> threshold_prune(const std::vector<ScoredId>& children, double threshold);
/// depth / max(hSuccess, epsilon).
double lts_priority(std::size_t depth, double h_success, double epsilon = 1e-6);
/// value + c * sqrt(ln(parent_visits + 1) / (child_visits + 1)); value is the mean backup.
double uct_score(double value_sum, int child_visits, int parent_visits, double c);

}  // namespace tot
