#include "tot/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "tot/errors.hpp"

namespace tot {

using nlohmann::json;

ReachabilityOracle domain_reachability(const Domain& domain) {
  return [&domain](const std::vector<std::string>& thoughts) -> std::optional<bool> {
    std::vector<Thought> zs;
    for (const auto& t : thoughts) zs.push_back(Thought::from_text(t));
    const State s(domain.prompt(), std::move(zs));
    if (!domain.validate(s)) return std::nullopt;
    return domain.distance_to_goal(s).has_value();
  };
}

json MetricsReport::to_json() const {
  auto opt = [](const std::optional<double>& x) { return x ? json(*x) : json(nullptr); };
  return {{"runs", runs},
          {"successRate", success_rate},
          {"expansions", expansions},
          {"generatedThoughts", generated_thoughts},
          {"tokens", tokens},
          {"distinctValidPaths", distinct_valid_paths},
          {"candidateDiversity", opt(candidate_diversity)},
          {"discriminativeAccuracy", opt(discriminative_accuracy)},
          {"calibrationError", opt(calibration_error)}};
}

std::optional<double> distinct_unigram_ratio(const std::vector<std::string>& texts) {
  std::set<std::string> distinct;
  long total = 0;
  for (const auto& t : texts) {
    std::istringstream in(t);
    for (std::string w; in >> w;) {
      distinct.insert(w);
      ++total;
    }
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(distinct.size()) / static_cast<double>(total);
}

double expected_calibration_error(const std::vector<std::pair<double, bool>>& samples, int bins) {
  if (samples.empty()) throw InvalidArgument("calibration error of an empty sample");
  if (bins < 1) throw InvalidArgument("bins must be >= 1");
  std::vector<double> conf(bins, 0.0), hits(bins, 0.0), count(bins, 0.0);
  for (const auto& [c, label] : samples) {
    if (!(c >= 0.0 && c <= 1.0)) throw InvalidArgument("confidence outside [0, 1]");
    const int b = std::min(static_cast<int>(c * bins), bins - 1);
    conf[b] += c;
    hits[b] += label ? 1.0 : 0.0;
    count[b] += 1.0;
  }
  double ece = 0.0;
  const double n = static_cast<double>(samples.size());
  for (int b = 0; b < bins; ++b) {
    if (count[b] == 0.0) continue;
    ece += count[b] / n * std::abs(hits[b] / count[b] - conf[b] / count[b]);
  }
  return ece;
}

namespace {

struct NodeInfo {
  std::optional<std::uint32_t> parent;
  std::string thought;
  std::optional<double> h_success;
};

struct RunView {
  std::map<std::uint32_t, NodeInfo> nodes;
  std::vector<std::vector<std::uint32_t>> batches;
  std::vector<std::uint32_t> goals;
  long expansions = 0;
  long generated = 0;
  long tokens = 0;

  std::vector<std::string> path(std::uint32_t id) const {
    std::vector<std::string> out;
    for (auto cur = std::optional<std::uint32_t>(id); cur;) {
      const auto& n = nodes.at(*cur);
      if (!n.parent) break;
      out.push_back(n.thought);
      cur = n.parent;
    }
    return {out.rbegin(), out.rend()};
  }
};

RunView view(const RunLog& log) {
  RunView v;
  for (const json& e : log.events()) {
    const auto type = e.at("event").get<std::string>();
    if (type == event::kNodeCreated) {
      NodeInfo n;
      if (e.contains("parent")) {
        n.parent = e["parent"].get<std::uint32_t>();
        n.thought = e.at("thought").get<std::string>();
        ++v.generated;
      }
      v.nodes[e.at("node").get<std::uint32_t>()] = std::move(n);
    } else if (type == event::kNodeScored) {
      v.nodes.at(e.at("node").get<std::uint32_t>()).h_success = e.at("hSuccess").get<double>();
    } else if (type == event::kNodeExpanded) {
      ++v.expansions;
      v.batches.push_back(e.at("children").get<std::vector<std::uint32_t>>());
    } else if (type == event::kGoalFound) {
      v.goals.push_back(e.at("node").get<std::uint32_t>());
    } else if (type == event::kBackendCall) {
      v.tokens += e.at("completionTokens").get<long>();
    }
  }
  return v;
}

}  // namespace

MetricsReport compute_metrics(const std::vector<const RunLog*>& logs, const std::vector<ReachabilityOracle>& oracles) {
  MetricsReport r;
  r.runs = static_cast<int>(logs.size());
  long solved = 0;
  double diversity_sum = 0.0;
  long diversity_batches = 0;
  double pair_score = 0.0;
  long pairs = 0;
  std::vector<std::pair<double, bool>> calibration;

  for (std::size_t i = 0; i < logs.size(); ++i) {
    const RunView v = view(*logs[i]);
    r.expansions += v.expansions;
    r.generated_thoughts += v.generated;
    r.tokens += v.tokens;
    if (!v.goals.empty()) ++solved;
    std::set<std::vector<std::string>> paths;
    for (auto g : v.goals) paths.insert(v.path(g));
    r.distinct_valid_paths += static_cast<long>(paths.size());

    for (const auto& batch : v.batches) {
      std::vector<std::string> texts;
      for (auto c : batch) texts.push_back(v.nodes.at(c).thought);
      if (auto ratio = distinct_unigram_ratio(texts)) {
        diversity_sum += *ratio;
        ++diversity_batches;
      }
    }

    const ReachabilityOracle* oracle = i < oracles.size() && oracles[i] ? &oracles[i] : nullptr;
    if (!oracle) continue;
    std::map<std::uint32_t, bool> labels;
    for (const auto& [id, n] : v.nodes) {
      if (!n.h_success) continue;
      if (auto label = (*oracle)(v.path(id))) {
        labels[id] = *label;
        calibration.emplace_back(std::clamp(*n.h_success, 0.0, 1.0), *label);
      }
    }
    for (const auto& batch : v.batches) {
      for (std::size_t a = 0; a < batch.size(); ++a) {
        for (std::size_t b = a + 1; b < batch.size(); ++b) {
          auto la = labels.find(batch[a]);
          auto lb = labels.find(batch[b]);
          if (la == labels.end() || lb == labels.end() || la->second == lb->second) continue;
          const double good = *v.nodes.at(la->second ? batch[a] : batch[b]).h_success;
          const double bad = *v.nodes.at(la->second ? batch[b] : batch[a]).h_success;
          pair_score += good > bad ? 1.0 : (good == bad ? 0.5 : 0.0);
          ++pairs;
        }
      }
    }
  }

  r.success_rate = logs.empty() ? 0.0 : static_cast<double>(solved) / static_cast<double>(logs.size());
  if (diversity_batches > 0) r.candidate_diversity = diversity_sum / static_cast<double>(diversity_batches);
  if (pairs > 0) r.discriminative_accuracy = pair_score / static_cast<double>(pairs);
  if (!calibration.empty()) r.calibration_error = expected_calibration_error(calibration);
  return r;
}

}  // namespace tot
