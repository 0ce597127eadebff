#include "tot/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <regex>
#include <sstream>

#include "tot/errors.hpp"

namespace tot {

namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string strip_punct(std::string word) {
  auto is_punct = [](unsigned char c) { return std::ispunct(c) || std::isspace(c); };
  while (!word.empty() && is_punct(word.back())) word.pop_back();
  std::size_t i = 0;
  while (i < word.size() && is_punct(word[i])) ++i;
  return word.substr(i);
}

double logprob_sum(const State& s) {
  double sum = 0.0;
  const auto thoughts = s.thoughts();
  for (std::size_t i = 0; i < thoughts.size(); ++i) {
    if (!thoughts[i].logprob()) {
      throw ScoringError("thought at depth " + std::to_string(i + 1) + " carries no logprob");
    }
    sum += *thoughts[i].logprob();
  }
  return sum;
}

}  // namespace

std::string_view cost_tag(const CostModel& m) {
  static constexpr std::string_view tags[] = {"G1", "G2", "G3"};
  return tags[m.index()];
}

double path_cost(const State& s, const CostModel& m) {
  if (std::holds_alternative<UniformCost>(m)) return static_cast<double>(s.depth());
  if (std::holds_alternative<NoCost>(m)) return 0.0;
  const double nll = -logprob_sum(s);
  if (!std::get<NllCost>(m).length_normalize) return nll;
  long tokens = 0;
  for (const Thought& z : s.thoughts()) tokens += z.token_count();
  return tokens == 0 ? 0.0 : nll / static_cast<double>(tokens);
}

std::string_view to_string(Inversion inversion) {
  switch (inversion) {
    case Inversion::reciprocal: return "reciprocal";
    case Inversion::neg_log: return "negLog";
    case Inversion::identity: return "identity";
  }
  return "unknown";
}

Inversion inversion_from_string(std::string_view text) {
  if (text == "reciprocal") return Inversion::reciprocal;
  if (text == "negLog") return Inversion::neg_log;
  if (text == "identity") return Inversion::identity;
  throw ConfigError("unknown inversion '" + std::string(text) + "' (reciprocal, negLog, identity)");
}

double invert_success(double hs, Inversion inversion, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be > 0");
  if (inversion == Inversion::identity) return hs;
  const double clamped = std::clamp(hs, epsilon, 1.0);
  if (inversion == Inversion::reciprocal) return 1.0 / clamped - 1.0;
  return -std::log(clamped);
}

std::string_view to_string(ScaleKind kind) { return kind == ScaleKind::success ? "successScale" : "costScale"; }

double CategoricalMapping::max_value() const {
  if (labels.empty()) throw ConfigError("categorical mapping is empty");
  double best = labels.front().second;
  for (const auto& [label, value] : labels) best = std::max(best, value);
  return best;
}

double categorical_to_score(std::string_view label, const CategoricalMapping& mapping) {
  auto lookup = [&](const std::string& word) -> std::optional<double> {
    for (const auto& [name, value] : mapping.labels) {
      if (lower(name) == word) return value;
    }
    return std::nullopt;
  };
  if (auto v = lookup(strip_punct(lower(label)))) return *v;
  std::istringstream in{lower(label)};
  std::optional<double> found;
  for (std::string w; in >> w;) {
    if (auto v = lookup(strip_punct(w))) found = v;
  }
  if (found) return *found;
  throw EvaluationError("unknown categorical label '" + std::string(label) + "'");
}

std::optional<double> parse_scalar_reply(std::string_view text) {
  static const std::regex number(R"((infinity|inf)|([-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?))",
                                 std::regex::icase);
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(text.begin(), text.end(), m, number)) return std::nullopt;
  if (m[1].matched) return std::numeric_limits<double>::infinity();
  return std::stod(m[2].str());
}

double sequence_probability(const State& s) { return std::exp(logprob_sum(s)); }

bool HeuristicModel::cost_scale() const {
  if (const auto* h1 = std::get_if<ScalarValue>(&kind)) return !h1->categorical && h1->scale.kind == ScaleKind::cost;
  if (const auto* h3 = std::get_if<External>(&kind)) return h3->scale == ScaleKind::cost;
  return false;
}

void HeuristicModel::validate() const {
  if (!(epsilon > 0.0) || epsilon >= 1.0) throw ConfigError("epsilon must be in (0, 1)");
  if (cost_scale() != (inversion == Inversion::identity)) {
    throw ConfigError(cost_scale() ? "cost-scale heuristics require identity inversion"
                                   : "identity inversion requires a cost-scale heuristic");
  }
  if (const auto* h1 = std::get_if<ScalarValue>(&kind)) {
    if (h1->categorical) {
      if (h1->categorical->max_value() <= 0.0) throw ConfigError("categorical mapping needs a positive maximum");
    } else if (h1->scale.kind == ScaleKind::success && !(h1->scale.hi > h1->scale.lo)) {
      throw ConfigError("value scale needs hi > lo");
    }
  }
  if (const auto* h3 = std::get_if<External>(&kind); h3 && !h3->estimate) {
    throw ConfigError("external heuristic has no estimate callback");
  }
}

std::string_view heuristic_tag(const HeuristicModel& h) {
  static constexpr std::string_view tags[] = {"H1", "H2", "H3"};
  return tags[h.kind.index()];
}

std::string_view to_string(Combiner c) { return c == Combiner::additive ? "additive" : "ratio"; }

double combine(Combiner c, double g, double h_cost, double h_success, double epsilon) {
  if (c == Combiner::additive) return g + h_cost;
  return g / std::max(h_success, epsilon);
}

namespace {

struct Heuristic {
  double h_cost = 0.0;
  double h_success = 0.0;
  std::optional<std::string> warning;
};

Heuristic from_success(double hs, const HeuristicModel& heur) {
  hs = std::clamp(hs, 0.0, 1.0);
  return {invert_success(hs, heur.inversion, heur.epsilon), hs, std::nullopt};
}

Heuristic from_cost(double hc, const HeuristicModel& heur) {
  const double cap = 1.0 / heur.epsilon - 1.0;
  if (std::isnan(hc) || hc >= cap) return {cap, 0.0, std::nullopt};
  hc = std::max(hc, 0.0);
  return {hc, 1.0 / (1.0 + hc), std::nullopt};
}

Heuristic worst(const HeuristicModel& heur, std::string why) {
  Heuristic h = heur.cost_scale() ? from_cost(std::numeric_limits<double>::infinity(), heur) : from_success(0.0, heur);
  h.warning = std::move(why);
  return h;
}

Heuristic evaluate_h1(const State& s, const ScalarValue& h1, const HeuristicModel& heur, Backend* evaluator,
                      const CallSite& site) {
  if (!evaluator) throw ConfigError("scalar-value heuristic needs an evaluator backend");
  std::string reply;
  try {
    reply = evaluator->evaluate(s, site).text;
  } catch (const BackendError& e) {
    throw EvaluationError(std::string("evaluator backend failed: ") + e.what());
  }
  if (h1.categorical) {
    try {
      return from_success(categorical_to_score(reply, *h1.categorical) / h1.categorical->max_value(), heur);
    } catch (const EvaluationError& e) {
      return worst(heur, e.what());
    }
  }
  const auto v = parse_scalar_reply(reply);
  if (!v) return worst(heur, "no number in evaluator reply '" + reply + "'");
  if (h1.scale.kind == ScaleKind::cost) return from_cost(*v, heur);
  return from_success((*v - h1.scale.lo) / (h1.scale.hi - h1.scale.lo), heur);
}

}  // namespace

Score score_state(const State& s, bool goal, const CostModel& cost, const HeuristicModel& heur, Combiner comb,
                  Backend* evaluator, const CallSite& site) {
  Score out;
  out.g = path_cost(s, cost);
  Heuristic h;
  if (goal) {
    h = {0.0, 1.0, std::nullopt};
  } else if (const auto* h1 = std::get_if<ScalarValue>(&heur.kind)) {
    h = evaluate_h1(s, *h1, heur, evaluator, site);
  } else if (std::holds_alternative<ThoughtProbability>(heur.kind)) {
    h = from_success(sequence_probability(s), heur);
  } else {
    const auto& h3 = std::get<External>(heur.kind);
    const double v = h3.estimate(s);
    h = h3.scale == ScaleKind::cost ? from_cost(v, heur) : from_success(v, heur);
  }
  out.h_cost = h.h_cost;
  out.h_success = h.h_success;
  out.warning = std::move(h.warning);
  out.f = combine(comb, out.g, out.h_cost, out.h_success, heur.epsilon);
  return out;
}

void apply_score(Node& n, const Score& score) {
  n.g = score.g;
  n.h_cost = score.h_cost;
  n.h_success = score.h_success;
  n.f = score.f;
}

}  // namespace tot
