#pragma once

/**
 * Node scoring: path cost g, heuristic h and the combined priority f.
 *
 * Heuristics produce a success-scale value hSuccess in [0, 1] (higher is more
 * promising) or, for evaluators that already count remaining steps, a
 * cost-scale value. Success-scale values are turned into hCost by an
 * inversion; cost-scale values pass through unchanged and hSuccess is derived
 * as 1 / (1 + hCost) so that every scored node carries both.
 */

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "tot/backend.hpp"
#include "tot/core.hpp"

namespace tot {

/// G1: depth.
struct UniformCost {};
/// G2: zero.
struct NoCost {};
/// G3: accumulated negative log-likelihood, optionally per token.
struct NllCost {
  bool length_normalize = false;
};

using CostModel = std::variant<UniformCost, NoCost, NllCost>;

/// "G1", "G2" or "G3".
std::string_view cost_tag(const CostModel& m);

/// Throws ScoringError naming the depth of the first thought without a logprob (G3).
double path_cost(const State& s, const CostModel& m);

enum class Inversion { reciprocal, neg_log, identity };

std::string_view to_string(Inversion inversion);
Inversion inversion_from_string(std::string_view text);

/// hs is clamped to [epsilon, 1] first. Identity returns hs unchanged.
double invert_success(double hs, Inversion inversion, double epsilon);

enum class ScaleKind { success, cost };

std::string_view to_string(ScaleKind kind);

/// Declared range of a scalar evaluator reply.
struct ValueScale {
  ScaleKind kind = ScaleKind::success;
  /// Success scale only: replies are mapped from [lo, hi] onto [0, 1] and clipped.
  double lo = 0.0;
  double hi = 10.0;
};

struct CategoricalMapping {
  std::vector<std::pair<std::string, double>> labels{{"sure", 2.0}, {"maybe", 1.0}, {"impossible", 0.0}};

  double max_value() const;
};

/// Raw mapped value of a label, matched case-insensitively. A reply whose
/// whole text is not a label is matched on its last word that is one.
/// Throws EvaluationError for unknown labels.
double categorical_to_score(std::string_view label, const CategoricalMapping& mapping);

/// First number in `text`; "inf"/"infinity" (before any number) gives +inf.
std::optional<double> parse_scalar_reply(std::string_view text);

/// exp(sum of logprobs); 1 for the root. Throws ScoringError on a missing logprob.
double sequence_probability(const State& s);

/// H1: evaluator backend, scalar or categorical reply.
struct ScalarValue {
  ValueScale scale;
  std::optional<CategoricalMapping> categorical;
};

/// H2: joint probability of the thought sequence.
struct ThoughtProbability {};

/// H3: caller-supplied estimate on the declared scale.
struct External {
  std::function<double(const State&)> estimate;
  ScaleKind scale = ScaleKind::success;
  std::string label = "external";
};

struct HeuristicModel {
  std::variant<ScalarValue, ThoughtProbability, External> kind;
  Inversion inversion = Inversion::reciprocal;
  double epsilon = 1e-6;

  /// True when the model yields cost-scale values.
  bool cost_scale() const;
  /// Throws ConfigError unless identity inversion is paired with a cost-scale model.
  void validate() const;
};

/// "H1", "H2" or "H3".
std::string_view heuristic_tag(const HeuristicModel& h);

enum class Combiner { additive, ratio };

std::string_view to_string(Combiner c);

struct Score {
  double g = 0.0;
  double h_cost = 0.0;
  double h_success = 0.0;
  double f = 0.0;
  /// Set when the evaluator reply could not be interpreted; the worst score was used.
  std::optional<std::string> warning;
};

/// Priority from g and the heuristic values.
double combine(Combiner c, double g, double h_cost, double h_success, double epsilon);

/// Scores `s`. Goal states get hSuccess = 1 and hCost = 0 without an
/// evaluator call. H1 calls `evaluator` (required then); a backend failure
/// is raised as EvaluationError.
Score score_state(const State& s, bool goal, const CostModel& cost, const HeuristicModel& heur, Combiner comb,
                  Backend* evaluator, const CallSite& site);

/// Copies g, hCost, hSuccess and f into `n`.
void apply_score(Node& n, const Score& score);

}  // namespace tot
