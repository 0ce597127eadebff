#pragma once

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tot/backend.hpp"
#include "tot/domain.hpp"

namespace tot {

/// Reply format of the oracle's evaluator.
enum class EvaluatorMode {
  steps,        ///< remaining optimal steps ("inf" when unreachable); cost scale
  rating,       ///< 10 / (1 + steps), 0 when unreachable; success scale 0..10
  categorical,  ///< "sure" when a goal is reachable, "impossible" otherwise
};

std::string_view to_string(EvaluatorMode mode);
EvaluatorMode evaluator_mode_from_string(std::string_view text);

/// Fixed candidate lists for given thought prefixes. Prefixes not listed fall
/// back to the domain's exhaustive enumeration.
class OracleScript {
 public:
  void add(std::vector<std::string> prefix, std::vector<std::string> candidates);
  const std::vector<std::string>* find(const State& s) const;
  bool empty() const noexcept { return entries_.empty(); }

 private:
  std::map<std::vector<std::string>, std::vector<std::string>> entries_;
};

/// Relative weight of the candidate at `rank` among `count`; the default is uniform.
using CandidateWeighting = std::function<double(const State&, const std::string& candidate, std::size_t rank)>;

/// Deterministic stand-in for a model backed by a domain's exhaustive
/// enumerator and breadth-first distance lookup.
///
/// Independent draws: draw i returns the i-th candidate (after top-k), and
/// nothing once the candidates are used up. Enumerated requests return one
/// numbered list. Logprobs are log(w_i / sum w) over the full candidate set.
class OracleBackend : public Backend {
 public:
  explicit OracleBackend(const Domain& domain, OracleScript script = {},
                         EvaluatorMode mode = EvaluatorMode::steps);

  void set_weighting(CandidateWeighting weighting) { weighting_ = std::move(weighting); }
  void set_evaluator_mode(EvaluatorMode mode) { mode_ = mode; }
  EvaluatorMode evaluator_mode() const noexcept { return mode_; }

  BackendReply generate(const State& s, const GenerationRequest& req, const CallSite& site) override;
  TextReply evaluate(const State& s, const CallSite& site) override;
  TextReply judge_goal(const State& s, const CallSite& site) override;
  TextReply judge_valid(const State& s, const CallSite& site) override;

  /// Candidate texts and their log-probabilities, in priority order.
  std::vector<std::pair<std::string, double>> candidates(const State& s) const;

  /// Evaluation text for `mode` without usage bookkeeping.
  std::string evaluation_text(const State& s, EvaluatorMode mode) const;

 protected:
  const Domain& domain() const noexcept { return domain_; }

 private:
  const Domain& domain_;
  OracleScript script_;
  EvaluatorMode mode_;
  CandidateWeighting weighting_;
};

struct MockOptions {
  std::uint64_t seed = 0;
  /// Probability that a generated thought is replaced by a distractor.
  double noise = 0.0;
  /// Probability that an evaluation is replaced by a random reply.
  double error_rate = 0.0;
  EvaluatorMode mode = EvaluatorMode::steps;
};

/// Seeded stochastic backend. Sampling follows a softmax over candidate rank
/// at the request temperature; temperature 0 always yields the top candidate.
/// Every call draws from its own stream derived from (seed, node, draw, attempt).
class MockBackend final : public Backend {
 public:
  MockBackend(const Domain& domain, MockOptions options, OracleScript script = {});

  const MockOptions& options() const noexcept { return options_; }

  BackendReply generate(const State& s, const GenerationRequest& req, const CallSite& site) override;
  TextReply evaluate(const State& s, const CallSite& site) override;
  TextReply judge_goal(const State& s, const CallSite& site) override;
  TextReply judge_valid(const State& s, const CallSite& site) override;

 private:
  std::mt19937_64 stream(Interface which, const CallSite& site) const;

  const Domain& domain_;
  MockOptions options_;
  OracleBackend oracle_;
};

}  // namespace tot
