#pragma once

/**
 * Run metrics computed from event logs.
 *
 *  - successRate: fraction of runs with at least one goalFound event;
 *  - expansions / generatedThoughts / tokens: totals over the logs;
 *  - distinctValidPaths: distinct goal thought sequences per run, summed;
 *  - candidateDiversity: mean distinct-unigram ratio of the thoughts created
 *    by one expansion, over all expansions with at least one child;
 *  - discriminativeAccuracy: over sibling pairs where one node can still
 *    reach a goal and the other cannot, the fraction ranked correctly by
 *    hSuccess (ties count one half);
 *  - calibrationError: 10-bin expected calibration error of hSuccess against
 *    goal reachability.
 *
 * Reachability labels come from a caller-supplied oracle, so the last two are
 * absent when no oracle is given or no labelled node carries hSuccess.
 */

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tot/domain.hpp"
#include "tot/run_log.hpp"

namespace tot {

/// Reachability of the state reached by `thoughts`; nullopt when unknown or invalid.
using ReachabilityOracle = std::function<std::optional<bool>(const std::vector<std::string>& thoughts)>;

/// Labels from the domain's exact distance-to-goal.
ReachabilityOracle domain_reachability(const Domain& domain);

struct MetricsReport {
  int runs = 0;
  double success_rate = 0.0;
  long expansions = 0;
  long generated_thoughts = 0;
  long tokens = 0;
  long distinct_valid_paths = 0;
  std::optional<double> candidate_diversity;
  std::optional<double> discriminative_accuracy;
  std::optional<double> calibration_error;

  nlohmann::json to_json() const;
};

/// Distinct unigrams over total unigrams of a batch of texts; nullopt for no words.
std::optional<double> distinct_unigram_ratio(const std::vector<std::string>& texts);

/// sum_b |B_b| / N * |accuracy(B_b) - confidence(B_b)| with equal-width bins
/// over [0, 1]; confidence c goes to bin min(floor(c * bins), bins - 1).
/// Throws InvalidArgument on an empty sample or a confidence outside [0, 1].
double expected_calibration_error(const std::vector<std::pair<double, bool>>& samples, int bins = 10);

/// One log per run; `oracles[i]` (may be empty) labels run i.
MetricsReport compute_metrics(const std::vector<const RunLog*>& logs, const std::vector<ReachabilityOracle>& oracles);

}  // namespace tot
