#pragma once

/**
 * Successor generation: a sampling strategy produces raw candidate thoughts,
 * then an ordered chain of accept/reject constraints filters them.
 *
 * Strategies:
 *  - independent: b separate single-sample draws;
 *  - diversity:   2b draws, greedy n-gram overlap filter, first b kept;
 *  - enumerated:  one call asking for a list of b options, parsed by line.
 *
 * Exact-text duplicates are removed (first occurrence kept) and the batch is
 * cut to b before constraints run, so adding a constraint can only shrink the
 * surviving set.
 */

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tot/backend.hpp"
#include "tot/core.hpp"
#include "tot/domain.hpp"

namespace tot {

enum class ProposalStrategy { independent, diversity, enumerated };

std::string_view to_string(ProposalStrategy strategy);

struct DiversityConfig {
  int ngram_n = 2;
  /// Forwarded to the backend as a presence penalty.
  double overlap_penalty = 0.0;
  int min_distinct = 1;
};

struct ProposalConfig {
  ProposalStrategy strategy = ProposalStrategy::independent;
  int branch = 3;
  Decoding decoding;
  std::optional<DiversityConfig> diversity;
  /// Extra proposal rounds when no candidate survives.
  int empty_retries = 1;
  std::string instruction;

  void validate() const;
};

/// C1: membership in the domain's action schema.
struct DomainActionConstraint {
  std::function<bool(std::string_view)> allowed;
};

/// C2: post-generation parse. The parser may return false or throw.
struct GrammarConstraint {
  std::function<bool(std::string_view)> parses;
};

/// C3: token-length bound.
struct LengthConstraint {
  int max_tokens = 1;
};

/// C4: validity of the extended state.
struct SemanticConstraint {
  std::function<Verdict(const State&)> validator;
};

using Constraint = std::variant<DomainActionConstraint, GrammarConstraint, LengthConstraint, SemanticConstraint>;
using ConstraintChain = std::vector<Constraint>;

/// "C1", "C2", "C3" or "C4".
std::string_view constraint_tag(const Constraint& c);

struct Rejection {
  std::string text;
  std::string reason;
};

/// Keeps, in order, the candidates every constraint accepts. A grammar parser
/// that throws rejects only that candidate.
std::vector<Thought> apply_constraints(const std::vector<Thought>& candidates, const ConstraintChain& chain,
                                       const State& s, std::vector<Rejection>* rejected = nullptr);

/// Distinct word n-grams of `text`. Texts shorter than n yield one gram made
/// of all their words.
std::vector<std::string> word_ngrams(std::string_view text, int n);

/// Greedy filter: a candidate is dropped when more than (|grams| - min_distinct)
/// of its n-grams already occur in the accepted candidates.
std::vector<Thought> diversity_filter(const std::vector<Thought>& candidates, int ngram_n, int min_distinct);

/// Splits an enumerated reply into thoughts: one per non-empty line with
/// leading markers such as "1.", "2)", "-" or "*" removed.
std::vector<std::string> parse_enumerated(std::string_view reply);

struct ProposalResult {
  std::vector<Thought> thoughts;
  std::vector<Rejection> rejected;
  int backend_calls = 0;
};

/// One round of successor generation for the node `node` in state `s`.
/// Backend failures surface as GenerationError.
ProposalResult propose_successors(const State& s, const ProposalConfig& cfg, Backend& backend,
                                  const ConstraintChain& chain, NodeId node, int attempt = 0);

}  // namespace tot
