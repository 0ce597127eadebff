#pragma once

/**
 * Run configuration: the component choices of one search, the named presets
 * and their JSON form.
 *
 * Component JSON (all keys optional except where noted):
 *   proposal:    {strategy: independent|diversity|enumerated, branch, temperature,
 *                 topK, topP, maxTokens, emptyRetries, ngramN, overlapPenalty, minDistinct}
 *   constraints: ["C1", "C2", {"kind": "C3", "maxTokens": 40}, "C4"]
 *   cost:        {kind: uniform|none|nll, lengthNormalize}
 *   heuristic:   {kind: value|categorical|probability|zero|distance,
 *                 scale: success|cost, lo, hi, inversion, epsilon}
 *   combiner:    additive|ratio
 *   strategy:    {kind: bestFirst|beam|greedyDfs|lts|mcts, width, threshold,
 *                 childLimit, explorationC, iterations, maxResamples}
 *   pruning:     {kind: beam|localBranch|threshold, k, b, threshold}
 *   goalTest:    T1|T2|T3
 *   validator:   none|domain|llm
 *   budget:      {maxExpansions, maxGeneratedThoughts, maxTokens, maxDepth, maxBackendCalls}
 *   collectAll, detectDuplicates
 */

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tot/domain.hpp"
#include "tot/generation.hpp"
#include "tot/oracle_backend.hpp"
#include "tot/scoring.hpp"
#include "tot/search.hpp"

namespace tot {

struct ConstraintSpec {
  std::string kind;  ///< "C1".."C4"
  int max_tokens = 64;
};

enum class HeuristicKind { value, categorical, probability, zero, distance };

/// Heuristic description independent of any backend or domain.
struct HeuristicSpec {
  HeuristicKind kind = HeuristicKind::value;
  ScaleKind scale = ScaleKind::success;
  double lo = 0.0;
  double hi = 10.0;
  Inversion inversion = Inversion::reciprocal;
  double epsilon = 1e-6;
};

struct ComponentConfig {
  ProposalConfig proposal;
  std::vector<ConstraintSpec> constraints;
  CostModel cost = UniformCost{};
  HeuristicSpec heuristic;
  Combiner combiner = Combiner::additive;
  StrategyConfig strategy;
  GoalTestKind goal_test = GoalTestKind::environment;
  ValidatorKind validator = ValidatorKind::domain;
  bool detect_duplicates = true;

  /// Throws ConfigError on inconsistent choices.
  void validate() const;
};

/// Evaluator reply format the oracle/mock backends should produce for `h`.
EvaluatorMode evaluator_mode_for(const HeuristicSpec& h);

/// Materialises the heuristic; "distance" reads the domain's exact distance.
HeuristicModel build_heuristic(const HeuristicSpec& h, const Domain& domain);
ConstraintChain build_constraints(const std::vector<ConstraintSpec>& specs, const Domain& domain);

/// Component tags, e.g. {"proposal": "S3+C1", "pruning": "P1", "strategy": "beam",
/// "cost": "G1", "heuristic": "H1", "goalTest": "T1"}. Pruning is "-" when absent.
std::map<std::string, std::string> component_tags(const ComponentConfig& c);

nlohmann::json to_json(const ComponentConfig& c);
/// Throws ConfigError on unknown keys' values or bad types.
ComponentConfig component_config_from_json(const nlohmann::json& j);

struct Preset {
  std::string name;
  std::string description;
  /// Expected component tags of the row this preset reproduces.
  std::map<std::string, std::string> manifest;
  ComponentConfig config;
};

const std::vector<Preset>& preset_registry();

/// Throws ConfigError listing the registry when `name` is unknown.
const Preset& load_preset(const std::string& name);

}  // namespace tot
