#include "tot/config.hpp"

#include <cmath>
#include <limits>

#include "tot/errors.hpp"

namespace tot {

using nlohmann::json;

namespace {

bool cost_scale(const HeuristicSpec& h) {
  return (h.kind == HeuristicKind::value && h.scale == ScaleKind::cost) || h.kind == HeuristicKind::zero ||
         h.kind == HeuristicKind::distance;
}

json number_or_inf(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double read_number(const json& j, const char* key) {
  const json& x = j.at(key);
  if (x.is_number()) return x.get<double>();
  if (x.is_string()) {
    const auto s = x.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw ConfigError(std::string("'") + key + "' must be a number or \"inf\"");
}

template <typename T>
T read(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    if constexpr (std::is_same_v<T, double>) {
      return read_number(j, key);
    } else {
      return j.at(key).get<T>();
    }
  } catch (const json::exception&) {
    throw ConfigError(std::string("bad value for '") + key + "'");
  }
}

std::string read_string(const json& j, const char* key, std::string fallback) {
  return read<std::string>(j, key, std::move(fallback));
}

const char* heuristic_kind_name(HeuristicKind k) {
  switch (k) {
    case HeuristicKind::value: return "value";
    case HeuristicKind::categorical: return "categorical";
    case HeuristicKind::probability: return "probability";
    case HeuristicKind::zero: return "zero";
    case HeuristicKind::distance: return "distance";
  }
  return "?";
}

HeuristicKind heuristic_kind_from(const std::string& s) {
  for (auto k : {HeuristicKind::value, HeuristicKind::categorical, HeuristicKind::probability, HeuristicKind::zero,
                 HeuristicKind::distance}) {
    if (s == heuristic_kind_name(k)) return k;
  }
  throw ConfigError("unknown heuristic kind '" + s + "'");
}

ProposalStrategy proposal_strategy_from(const std::string& s) {
  for (auto p : {ProposalStrategy::independent, ProposalStrategy::diversity, ProposalStrategy::enumerated}) {
    if (s == to_string(p)) return p;
  }
  throw ConfigError("unknown proposal strategy '" + s + "'");
}

GoalTestKind goal_test_from(const std::string& s) {
  if (s == "T1") return GoalTestKind::deterministic;
  if (s == "T2") return GoalTestKind::llm;
  if (s == "T3") return GoalTestKind::environment;
  throw ConfigError("unknown goal test '" + s + "' (T1, T2, T3)");
}

ValidatorKind validator_from(const std::string& s) {
  for (auto v : {ValidatorKind::none, ValidatorKind::domain, ValidatorKind::llm}) {
    if (s == to_string(v)) return v;
  }
  throw ConfigError("unknown validator '" + s + "'");
}

const char* strategy_label(const Strategy& s) {
  static const char* labels[] = {"BFS", "Beam", "DFS", "LTS", "MCTS"};
  return labels[s.index()];
}

}  // namespace

void ComponentConfig::validate() const {
  proposal.validate();
  StrategyConfig copy = strategy;
  copy.validate();
  if (cost_scale(heuristic) != (heuristic.inversion == Inversion::identity)) {
    throw ConfigError(cost_scale(heuristic) ? "cost-scale heuristics require identity inversion"
                                            : "identity inversion requires a cost-scale heuristic");
  }
  if (!(heuristic.epsilon > 0.0) || heuristic.epsilon >= 1.0) throw ConfigError("epsilon must be in (0, 1)");
  if (heuristic.kind == HeuristicKind::value && heuristic.scale == ScaleKind::success && !(heuristic.hi > heuristic.lo)) {
    throw ConfigError("value scale needs hi > lo");
  }
  for (const auto& c : constraints) {
    if (c.kind != "C1" && c.kind != "C2" && c.kind != "C3" && c.kind != "C4") {
      throw ConfigError("unknown constraint '" + c.kind + "'");
    }
    if (c.kind == "C3" && c.max_tokens < 1) throw ConfigError("C3 maxTokens must be >= 1");
  }
}

EvaluatorMode evaluator_mode_for(const HeuristicSpec& h) {
  if (h.kind == HeuristicKind::categorical) return EvaluatorMode::categorical;
  if (h.kind == HeuristicKind::value && h.scale == ScaleKind::success) return EvaluatorMode::rating;
  return EvaluatorMode::steps;
}

HeuristicModel build_heuristic(const HeuristicSpec& h, const Domain& domain) {
  HeuristicModel m;
  m.inversion = h.inversion;
  m.epsilon = h.epsilon;
  switch (h.kind) {
    case HeuristicKind::value: m.kind = ScalarValue{ValueScale{h.scale, h.lo, h.hi}, std::nullopt}; break;
    case HeuristicKind::categorical: m.kind = ScalarValue{ValueScale{}, CategoricalMapping{}}; break;
    case HeuristicKind::probability: m.kind = ThoughtProbability{}; break;
    case HeuristicKind::zero: m.kind = External{[](const State&) { return 0.0; }, ScaleKind::cost, "zero"}; break;
    case HeuristicKind::distance:
      m.kind = External{[&domain](const State& s) {
                          try {
                            const auto d = domain.distance_to_goal(s);
                            return d ? static_cast<double>(*d) : std::numeric_limits<double>::infinity();
                          } catch (const InvalidStateError&) {
                            return std::numeric_limits<double>::infinity();
                          }
                        },
                        ScaleKind::cost, "distance"};
      break;
  }
  m.validate();
  return m;
}

ConstraintChain build_constraints(const std::vector<ConstraintSpec>& specs, const Domain& domain) {
  ConstraintChain chain;
  for (const auto& c : specs) {
    if (c.kind == "C1") {
      chain.push_back(DomainActionConstraint{[&domain](std::string_view t) { return domain.accepts_action(t); }});
    } else if (c.kind == "C2") {
      // The bundled domains parse thoughts with the same grammar that defines their action schema.
      chain.push_back(GrammarConstraint{[&domain](std::string_view t) {
        return t.find('\n') == std::string_view::npos && domain.accepts_action(t);
      }});
    } else if (c.kind == "C3") {
      chain.push_back(LengthConstraint{c.max_tokens});
    } else if (c.kind == "C4") {
      chain.push_back(SemanticConstraint{[&domain](const State& s) { return domain.validate(s); }});
    } else {
      throw ConfigError("unknown constraint '" + c.kind + "'");
    }
  }
  return chain;
}

std::map<std::string, std::string> component_tags(const ComponentConfig& c) {
  static const char* proposal_tags[] = {"S1", "S2", "S3"};
  std::string proposal = proposal_tags[static_cast<int>(c.proposal.strategy)];
  for (const auto& k : c.constraints) proposal += "+" + k.kind;

  StrategyConfig s = c.strategy;
  s.validate();
  std::string pruning = "-";
  if (s.pruning) {
    pruning = std::string(pruning_tag(*s.pruning));
  } else if (const auto* dfs = std::get_if<GreedyDfs>(&s.strategy); dfs && std::isfinite(dfs->threshold)) {
    pruning = "P3";
  }

  std::string heuristic = "H3";
  if (c.heuristic.kind == HeuristicKind::value || c.heuristic.kind == HeuristicKind::categorical) heuristic = "H1";
  if (c.heuristic.kind == HeuristicKind::probability) heuristic = "H2";

  return {{"proposal", proposal},
          {"pruning", pruning},
          {"strategy", strategy_label(s.strategy)},
          {"cost", std::string(cost_tag(c.cost))},
          {"heuristic", heuristic},
          {"goalTest", std::string(goal_test_tag(c.goal_test))}};
}

json to_json(const ComponentConfig& c) {
  const auto& p = c.proposal;
  json proposal = {{"strategy", std::string(to_string(p.strategy))},
                   {"branch", p.branch},
                   {"temperature", p.decoding.temperature},
                   {"maxTokens", p.decoding.max_tokens},
                   {"emptyRetries", p.empty_retries}};
  if (p.decoding.top_k) proposal["topK"] = *p.decoding.top_k;
  if (p.decoding.top_p) proposal["topP"] = *p.decoding.top_p;
  if (p.diversity) {
    proposal["ngramN"] = p.diversity->ngram_n;
    proposal["overlapPenalty"] = p.diversity->overlap_penalty;
    proposal["minDistinct"] = p.diversity->min_distinct;
  }
  if (!p.instruction.empty()) proposal["instruction"] = p.instruction;

  json constraints = json::array();
  for (const auto& k : c.constraints) {
    if (k.kind == "C3") {
      constraints.push_back({{"kind", "C3"}, {"maxTokens", k.max_tokens}});
    } else {
      constraints.push_back(k.kind);
    }
  }

  json cost;
  if (std::holds_alternative<UniformCost>(c.cost)) cost = {{"kind", "uniform"}};
  if (std::holds_alternative<NoCost>(c.cost)) cost = {{"kind", "none"}};
  if (const auto* nll = std::get_if<NllCost>(&c.cost)) cost = {{"kind", "nll"}, {"lengthNormalize", nll->length_normalize}};

  const auto& h = c.heuristic;
  json heuristic = {{"kind", heuristic_kind_name(h.kind)},
                    {"scale", h.scale == ScaleKind::success ? "success" : "cost"},
                    {"lo", h.lo},
                    {"hi", h.hi},
                    {"inversion", std::string(to_string(h.inversion))},
                    {"epsilon", h.epsilon}};

  const auto& sc = c.strategy;
  json strategy = {{"kind", std::string(strategy_name(sc.strategy))}};
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Beam>) strategy["width"] = s.width;
        if constexpr (std::is_same_v<S, GreedyDfs>) {
          strategy["threshold"] = number_or_inf(s.threshold);
          strategy["childLimit"] = s.child_limit;
        }
        if constexpr (std::is_same_v<S, Mcts>) {
          strategy["explorationC"] = s.exploration_c;
          strategy["iterations"] = s.iterations;
          strategy["maxResamples"] = s.max_resamples;
        }
      },
      sc.strategy);

  json pruning = nullptr;
  if (sc.pruning) {
    std::visit(
        [&](const auto& p) {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, BeamPrune>) pruning = {{"kind", "beam"}, {"k", p.k}};
          if constexpr (std::is_same_v<P, LocalBranch>) pruning = {{"kind", "localBranch"}, {"b", p.b}};
          if constexpr (std::is_same_v<P, LocalThreshold>) {
            pruning = {{"kind", "threshold"}, {"threshold", number_or_inf(p.threshold)}};
          }
        },
        *sc.pruning);
  }

  const auto& b = sc.budget;
  json budget = {{"maxDepth", b.max_depth}};
  if (b.max_expansions) budget["maxExpansions"] = *b.max_expansions;
  if (b.max_generated_thoughts) budget["maxGeneratedThoughts"] = *b.max_generated_thoughts;
  if (b.max_tokens) budget["maxTokens"] = *b.max_tokens;
  if (b.max_backend_calls) budget["maxBackendCalls"] = *b.max_backend_calls;

  return {{"proposal", proposal},
          {"constraints", constraints},
          {"cost", cost},
          {"heuristic", heuristic},
          {"combiner", std::string(to_string(c.combiner))},
          {"strategy", strategy},
          {"pruning", pruning},
          {"goalTest", std::string(goal_test_tag(c.goal_test))},
          {"validator", std::string(to_string(c.validator))},
          {"budget", budget},
          {"collectAll", sc.collect_all},
          {"detectDuplicates", c.detect_duplicates}};
}

ComponentConfig component_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("component configuration must be an object");
  ComponentConfig c;

  if (j.contains("proposal")) {
    const json& p = j["proposal"];
    auto& cfg = c.proposal;
    cfg.strategy = proposal_strategy_from(read_string(p, "strategy", "independent"));
    cfg.branch = read<int>(p, "branch", cfg.branch);
    cfg.decoding.temperature = read<double>(p, "temperature", cfg.decoding.temperature);
    cfg.decoding.max_tokens = read<int>(p, "maxTokens", cfg.decoding.max_tokens);
    if (p.contains("topK")) cfg.decoding.top_k = read<int>(p, "topK", 0);
    if (p.contains("topP")) cfg.decoding.top_p = read<double>(p, "topP", 1.0);
    cfg.empty_retries = read<int>(p, "emptyRetries", cfg.empty_retries);
    cfg.instruction = read_string(p, "instruction", "");
    if (cfg.strategy == ProposalStrategy::diversity) {
      DiversityConfig d;
      d.ngram_n = read<int>(p, "ngramN", d.ngram_n);
      d.overlap_penalty = read<double>(p, "overlapPenalty", d.overlap_penalty);
      d.min_distinct = read<int>(p, "minDistinct", d.min_distinct);
      cfg.diversity = d;
    }
  }

  if (j.contains("constraints")) {
    if (!j["constraints"].is_array()) throw ConfigError("'constraints' must be an array");
    for (const json& k : j["constraints"]) {
      ConstraintSpec spec;
      if (k.is_string()) {
        spec.kind = k.get<std::string>();
      } else if (k.is_object()) {
        spec.kind = read_string(k, "kind", "");
        spec.max_tokens = read<int>(k, "maxTokens", spec.max_tokens);
      } else {
        throw ConfigError("constraints must be strings or objects");
      }
      c.constraints.push_back(spec);
    }
  }

  if (j.contains("cost")) {
    const auto kind = read_string(j["cost"], "kind", "uniform");
    if (kind == "uniform") {
      c.cost = UniformCost{};
    } else if (kind == "none") {
      c.cost = NoCost{};
    } else if (kind == "nll") {
      c.cost = NllCost{read<bool>(j["cost"], "lengthNormalize", false)};
    } else {
      throw ConfigError("unknown cost kind '" + kind + "' (uniform, none, nll)");
    }
  }

  if (j.contains("heuristic")) {
    const json& h = j["heuristic"];
    auto& spec = c.heuristic;
    spec.kind = heuristic_kind_from(read_string(h, "kind", "value"));
    const auto scale = read_string(h, "scale", cost_scale(spec) ? "cost" : "success");
    if (scale != "success" && scale != "cost") throw ConfigError("heuristic scale must be success or cost");
    spec.scale = scale == "cost" ? ScaleKind::cost : ScaleKind::success;
    spec.lo = read<double>(h, "lo", spec.lo);
    spec.hi = read<double>(h, "hi", spec.hi);
    const bool cost = cost_scale(spec);
    spec.inversion = inversion_from_string(read_string(h, "inversion", cost ? "identity" : "reciprocal"));
    spec.epsilon = read<double>(h, "epsilon", spec.epsilon);
  }

  if (j.contains("combiner")) {
    const auto s = j["combiner"].get<std::string>();
    if (s == "additive") {
      c.combiner = Combiner::additive;
    } else if (s == "ratio") {
      c.combiner = Combiner::ratio;
    } else {
      throw ConfigError("unknown combiner '" + s + "'");
    }
  }

  if (j.contains("strategy")) {
    const json& s = j["strategy"];
    const auto kind = read_string(s, "kind", "bestFirst");
    if (kind == "bestFirst") {
      c.strategy.strategy = BestFirst{};
    } else if (kind == "beam") {
      c.strategy.strategy = Beam{read<int>(s, "width", 5)};
    } else if (kind == "greedyDfs") {
      GreedyDfs d;
      d.threshold = read<double>(s, "threshold", d.threshold);
      d.child_limit = read<int>(s, "childLimit", d.child_limit);
      c.strategy.strategy = d;
    } else if (kind == "lts") {
      c.strategy.strategy = Lts{};
    } else if (kind == "mcts") {
      Mcts m;
      m.exploration_c = read<double>(s, "explorationC", m.exploration_c);
      m.iterations = read<int>(s, "iterations", m.iterations);
      m.max_resamples = read<int>(s, "maxResamples", m.max_resamples);
      c.strategy.strategy = m;
    } else {
      throw ConfigError("unknown strategy '" + kind + "' (bestFirst, beam, greedyDfs, lts, mcts)");
    }
  }

  if (j.contains("pruning") && !j["pruning"].is_null()) {
    const json& p = j["pruning"];
    const auto kind = read_string(p, "kind", "");
    if (kind == "beam") {
      c.strategy.pruning = BeamPrune{read<int>(p, "k", 5)};
    } else if (kind == "localBranch") {
      c.strategy.pruning = LocalBranch{read<int>(p, "b", 3)};
    } else if (kind == "threshold") {
      c.strategy.pruning = LocalThreshold{read<double>(p, "threshold", INFINITY)};
    } else {
      throw ConfigError("unknown pruning '" + kind + "' (beam, localBranch, threshold)");
    }
  }

  if (j.contains("goalTest")) c.goal_test = goal_test_from(j["goalTest"].get<std::string>());
  if (j.contains("validator")) c.validator = validator_from(j["validator"].get<std::string>());

  if (j.contains("budget")) {
    const json& b = j["budget"];
    auto& budget = c.strategy.budget;
    budget.max_depth = read<int>(b, "maxDepth", budget.max_depth);
    if (b.contains("maxExpansions")) budget.max_expansions = read<long>(b, "maxExpansions", 0);
    if (b.contains("maxGeneratedThoughts")) budget.max_generated_thoughts = read<long>(b, "maxGeneratedThoughts", 0);
    if (b.contains("maxTokens")) budget.max_tokens = read<long>(b, "maxTokens", 0);
    if (b.contains("maxBackendCalls")) budget.max_backend_calls = read<long>(b, "maxBackendCalls", 0);
  }
  c.strategy.collect_all = read<bool>(j, "collectAll", false);
  c.detect_duplicates = read<bool>(j, "detectDuplicates", true);

  c.validate();
  return c;
}

namespace {

ComponentConfig case_study() {
  ComponentConfig c;
  c.proposal.branch = 3;
  c.heuristic = {HeuristicKind::value, ScaleKind::cost, 0.0, 10.0, Inversion::identity, 1e-6};
  c.strategy.strategy = BestFirst{};
  c.goal_test = GoalTestKind::environment;
  return c;
}

ComponentConfig yao_game24() {
  ComponentConfig c;
  c.proposal.strategy = ProposalStrategy::enumerated;
  c.proposal.branch = 8;
  c.constraints = {{"C1"}};
  c.cost = UniformCost{};
  c.heuristic = {HeuristicKind::categorical, ScaleKind::success, 0.0, 10.0, Inversion::reciprocal, 1e-6};
  c.strategy.strategy = Beam{5};
  c.strategy.pruning = BeamPrune{5};
  c.strategy.budget.max_depth = 3;
  c.goal_test = GoalTestKind::deterministic;
  return c;
}

ComponentConfig yao_dfs() {
  ComponentConfig c;
  c.proposal.branch = 3;
  c.cost = NoCost{};
  c.heuristic = {HeuristicKind::value, ScaleKind::success, 0.0, 10.0, Inversion::reciprocal, 1e-6};
  c.strategy.strategy = GreedyDfs{};
  c.strategy.pruning = LocalThreshold{8.0};
  c.strategy.budget.max_depth = 12;
  c.goal_test = GoalTestKind::environment;
  return c;
}

ComponentConfig pendurkar_lts() {
  ComponentConfig c;
  c.proposal.branch = 4;
  c.constraints = {{"C1"}};
  c.cost = UniformCost{};
  c.heuristic = {HeuristicKind::probability, ScaleKind::success, 0.0, 1.0, Inversion::neg_log, 1e-6};
  c.combiner = Combiner::ratio;
  c.strategy.strategy = Lts{};
  c.strategy.pruning = LocalBranch{3};
  c.strategy.budget.max_depth = 12;
  c.goal_test = GoalTestKind::environment;
  return c;
}

ComponentConfig hao_mcts() {
  ComponentConfig c;
  c.proposal.branch = 3;
  c.constraints = {{"C1"}};
  c.cost = NoCost{};
  c.heuristic = {HeuristicKind::value, ScaleKind::success, 0.0, 10.0, Inversion::reciprocal, 1e-6};
  c.strategy.strategy = Mcts{};
  c.strategy.budget.max_depth = 12;
  c.goal_test = GoalTestKind::environment;
  return c;
}

ComponentConfig zhang_bfs() {
  ComponentConfig c;
  c.proposal.strategy = ProposalStrategy::enumerated;
  c.proposal.branch = 5;
  c.constraints = {{"C4"}};
  c.cost = NoCost{};
  c.heuristic = {HeuristicKind::value, ScaleKind::success, 0.0, 10.0, Inversion::reciprocal, 1e-6};
  c.strategy.strategy = BestFirst{};
  c.strategy.pruning = LocalThreshold{8.0};
  c.strategy.budget.max_depth = 12;
  c.goal_test = GoalTestKind::llm;
  c.validator = ValidatorKind::none;
  return c;
}

std::map<std::string, std::string> manifest(const char* proposal, const char* pruning, const char* strategy,
                                            const char* cost, const char* heuristic, const char* goal) {
  return {{"proposal", proposal}, {"pruning", pruning}, {"strategy", strategy},
          {"cost", cost},         {"heuristic", heuristic}, {"goalTest", goal}};
}

}  // namespace

const std::vector<Preset>& preset_registry() {
  static const std::vector<Preset> registry = {
      {"case-study-bfs", "Blocksworld worked example: best-first on depth plus remaining-step estimate",
       manifest("S1", "-", "BFS", "G1", "H1", "T3"), case_study()},
      {"yao-game24-beam", "Game of 24: enumerated proposals, breadth-first beam over categorical values",
       manifest("S3+C1", "P1", "Beam", "G1", "H1", "T1"), yao_game24()},
      {"yao-crosswords-dfs", "Greedy depth-first search with an f cutoff, run on Blocksworld",
       manifest("S1", "P3", "DFS", "G2", "H1", "T3"), yao_dfs()},
      {"pendurkar-lts", "Levin tree search on depth over thought-sequence probability",
       manifest("S1+C1", "P2", "LTS", "G1", "H2", "T3"), pendurkar_lts()},
      {"hao-blocksworld-mcts", "Blocksworld MCTS with UCT selection and leaf-value backup",
       manifest("S1+C1", "-", "MCTS", "G2", "H1", "T3"), hao_mcts()},
      {"zhang-bfs", "Best-first over enumerated, validity-filtered proposals with a judged goal test",
       manifest("S3+C4", "P3", "BFS", "G2", "H1", "T2"), zhang_bfs()},
  };
  return registry;
}

const Preset& load_preset(const std::string& name) {
  for (const auto& p : preset_registry()) {
    if (p.name == name) return p;
  }
  std::string names;
  for (const auto& p : preset_registry()) names += (names.empty() ? "" : ", ") + p.name;
  throw ConfigError("unknown preset '" + name + "'; available: " + names);
}

}  // namespace tot
