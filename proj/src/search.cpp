#include "tot/search.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <queue>
#include <tuple>

#include "tot/errors.hpp"

namespace tot {

using nlohmann::json;

std::string_view strategy_name(const Strategy& s) {
  static constexpr std::string_view names[] = {"bestFirst", "beam", "greedyDfs", "lts", "mcts"};
  return names[s.index()];
}

std::string_view pruning_tag(const Pruning& p) {
  static constexpr std::string_view tags[] = {"P1", "P2", "P3"};
  return tags[p.index()];
}

void StrategyConfig::validate() {
  budget.validate();
  if (pruning) {
    if (const auto* p = std::get_if<LocalBranch>(&*pruning); p && p->b < 1) throw ConfigError("P2 needs b >= 1");
    if (const auto* p = std::get_if<LocalThreshold>(&*pruning); p && std::isnan(p->threshold)) {
      throw ConfigError("P3 threshold is NaN");
    }
  }
  if (const auto* beam = std::get_if<Beam>(&strategy)) {
    if (beam->width < 1) throw ConfigError("beam width k must be >= 1");
    if (!pruning) pruning = BeamPrune{beam->width};
    const auto* p1 = std::get_if<BeamPrune>(&*pruning);
    if (!p1) throw ConfigError("beam search takes only layer pruning (P1)");
    if (p1->k != beam->width) throw ConfigError("beam pruning k must equal the beam width");
    return;
  }
  if (pruning && std::holds_alternative<BeamPrune>(*pruning)) {
    throw ConfigError("layer pruning (P1) requires the beam strategy");
  }
  if (const auto* mcts = std::get_if<Mcts>(&strategy)) {
    if (pruning) throw ConfigError("MCTS carries no pruning policy");
    if (!(mcts->exploration_c > 0.0)) throw ConfigError("MCTS exploration constant must be > 0");
    if (mcts->iterations < 1) throw ConfigError("MCTS iterations must be >= 1");
    if (mcts->max_resamples < 0) throw ConfigError("MCTS max_resamples must be >= 0");
  }
  if (const auto* dfs = std::get_if<GreedyDfs>(&strategy)) {
    if (dfs->child_limit < 1) throw ConfigError("DFS child limit must be >= 1");
    if (std::isnan(dfs->threshold)) throw ConfigError("DFS threshold is NaN");
  }
}

std::string_view goal_test_tag(GoalTestKind kind) {
  switch (kind) {
    case GoalTestKind::deterministic: return "T1";
    case GoalTestKind::llm: return "T2";
    case GoalTestKind::environment: return "T3";
  }
  return "?";
}

std::string_view to_string(ValidatorKind kind) {
  switch (kind) {
    case ValidatorKind::none: return "none";
    case ValidatorKind::domain: return "domain";
    case ValidatorKind::llm: return "llm";
  }
  return "?";
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::solved: return "solved";
    case Outcome::exhausted: return "exhausted";
    case Outcome::budget_exceeded: return "budgetExceeded";
    case Outcome::aborted: return "aborted";
  }
  return "?";
}

Problem problem_from_domain(const Domain& domain) {
  Problem p;
  p.root = domain.initial_state();
  p.is_goal = [&domain](const State& s) { return domain.is_goal(s); };
  p.validate = [&domain](const State& s) { return domain.validate(s); };
  p.projector = domain.projector();
  return p;
}

namespace {

bool by_f_then_id(const ScoredId& a, const ScoredId& b) { return std::tie(a.f, a.id) < std::tie(b.f, b.id); }

std::vector<NodeId> smallest(std::vector<ScoredId> xs, int k) {
  std::stable_sort(xs.begin(), xs.end(), by_f_then_id);
  if (xs.size() > static_cast<std::size_t>(k)) xs.resize(static_cast<std::size_t>(k));
  std::vector<NodeId> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(x.id);
  return out;
}

}  // namespace

std::vector<NodeId> beam_prune(std::vector<ScoredId> layer, int k) { return smallest(std::move(layer), k); }

std::vector<NodeId> local_branch_prune(std::vector<ScoredId> children, int b) {
  return smallest(std::move(children), b);
}

std::vector<NodeId> threshold_prune(const std::vector<ScoredId>& children, double threshold) {
  std::vector<NodeId> out;
  for (const auto& c : children) {
    if (c.f <= threshold) out.push_back(c.id);
  }
  return out;
}

double lts_priority(std::size_t depth, double h_success, double epsilon) {
  return static_cast<double>(depth) / std::max(h_success, epsilon);
}

double uct_score(double value_sum, int child_visits, int parent_visits, double c) {
  if (child_visits == 0) return std::numeric_limits<double>::infinity();
  return value_sum / child_visits +
         c * std::sqrt(std::log(static_cast<double>(parent_visits) + 1.0) / (static_cast<double>(child_visits) + 1.0));
}

namespace {

struct BudgetExhausted {};

/// Forwards to the real backend, enforcing call/token budgets and logging usage.
class MeteredBackend final : public Backend {
 public:
  MeteredBackend(Backend& inner, const SearchBudget& budget, SearchResult& out)
      : inner_(inner), budget_(budget), out_(out) {}

  BackendReply generate(const State& s, const GenerationRequest& req, const CallSite& site) override {
    return call(Interface::generate, site, [&] {
      BackendReply r = inner_.generate(s, req, site);
      return std::pair{r, r.usage};
    });
  }
  TextReply evaluate(const State& s, const CallSite& site) override {
    return text_call(Interface::evaluate, site, [&] { return inner_.evaluate(s, site); });
  }
  TextReply judge_goal(const State& s, const CallSite& site) override {
    return text_call(Interface::judge_goal, site, [&] { return inner_.judge_goal(s, site); });
  }
  TextReply judge_valid(const State& s, const CallSite& site) override {
    return text_call(Interface::judge_valid, site, [&] { return inner_.judge_valid(s, site); });
  }

 private:
  template <typename F>
  TextReply text_call(Interface which, const CallSite& site, F&& f) {
    return call(which, site, [&] {
      TextReply r = f();
      return std::pair{r, r.usage};
    });
  }

  template <typename F>
  auto call(Interface which, const CallSite& site, F&& f) -> std::decay_t<decltype(f().first)> {
    auto& stats = out_.stats;
    if (budget_.max_backend_calls && stats.backend_calls >= *budget_.max_backend_calls) throw BudgetExhausted{};
    if (budget_.max_tokens && stats.tokens >= *budget_.max_tokens) throw BudgetExhausted{};
    ++stats.backend_calls;
    json e = {{"interface", std::string(to_string(which))},
              {"node", site.node},
              {"draw", site.draw},
              {"attempt", site.attempt}};
    try {
      auto [reply, usage] = f();
      stats.tokens += usage.completion_tokens;
      stats.prompt_tokens += usage.prompt_tokens;
      if (out_.tree.contains(site.node)) out_.tree.at(site.node).tokens_spent += usage.completion_tokens;
      e["ok"] = true;
      e["promptTokens"] = usage.prompt_tokens;
      e["completionTokens"] = usage.completion_tokens;
      out_.log.append(event::kBackendCall, std::move(e));
      return reply;
    } catch (const BackendError& err) {
      e["ok"] = false;
      e["promptTokens"] = 0;
      e["completionTokens"] = 0;
      e["error"] = err.what();
      out_.log.append(event::kBackendCall, std::move(e));
      throw;
    }
  }

  Backend& inner_;
  const SearchBudget& budget_;
  SearchResult& out_;
};

class Engine {
 public:
  Engine(const Problem& problem, const StrategyConfig& config, const SearchComponents& components, SearchResult& out)
      : problem_(problem),
        config_(config),
        comp_(components),
        out_(out),
        budget_(config.budget),
        metered_(*components.backend, budget_, out) {}

  void run() {
    const NodeId root = make_root();
    std::visit(
        [&](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, BestFirst>) best_first(root, false);
          if constexpr (std::is_same_v<S, Lts>) best_first(root, true);
          if constexpr (std::is_same_v<S, Beam>) beam(root, s.width);
          if constexpr (std::is_same_v<S, GreedyDfs>) dfs(root, s);
          if constexpr (std::is_same_v<S, Mcts>) mcts(root, s);
        },
        config_.strategy);
  }

 private:
  SearchTree& tree() { return out_.tree; }
  SearchStats& stats() { return out_.stats; }
  bool done() const { return !out_.solutions.empty() && !config_.collect_all; }

  void log_created(NodeId id) {
    const Node& n = tree().at(id);
    json e = {{"node", id}, {"depth", n.depth()}};
    if (n.parent) {
      e["parent"] = *n.parent;
      e["thought"] = n.state.last().text();
      e["tokens"] = n.state.last().token_count();
      if (n.state.last().logprob()) e["logprob"] = *n.state.last().logprob();
    }
    out_.log.append(event::kNodeCreated, std::move(e));
  }

  void score(NodeId id) {
    Node& n = tree().at(id);
    const State state = n.state;
    const bool goal = n.goal_test;
    const Score sc = score_state(state, goal, comp_.cost, comp_.heuristic, comp_.combiner, &metered_,
                                 CallSite{id, 0, 0});
    Node& scored = tree().at(id);
    apply_score(scored, sc);
    json e = {{"node", id}, {"g", sc.g}, {"hCost", sc.h_cost}, {"hSuccess", sc.h_success}, {"f", sc.f}};
    if (sc.warning) {
      ++stats().evaluation_warnings;
      e["warning"] = *sc.warning;
    }
    out_.log.append(event::kNodeScored, std::move(e));
  }

  void goal_test_at_creation(NodeId id) {
    if (comp_.goal_test == GoalTestKind::llm || !problem_.is_goal) return;
    Node& n = tree().at(id);
    n.goal_test = problem_.is_goal(n.state);
  }

  void prune(NodeId id, NodeStatus status, const std::string& reason) {
    tree().at(id).set_status(status);
    ++stats().pruned_nodes;
    out_.log.append(event::kNodePruned, {{"node", id}, {"reason", reason}});
  }

  NodeId make_root() {
    const NodeId root = tree().add_root(problem_.root);
    rounds_.push_back(0);
    log_created(root);
    if (auto key = world_key(root)) seen_[*key] = 0;
    goal_test_at_creation(root);
    score(root);
    return root;
  }

  std::optional<std::string> world_key(NodeId id) {
    if (!comp_.detect_duplicates || !problem_.projector) return std::nullopt;
    try {
      return tot::world_key(tree().at(id).state, &problem_.projector);
    } catch (const InvalidStateError&) {
      return std::nullopt;
    }
  }

  Verdict check_valid(NodeId id) {
    const State state = tree().at(id).state;
    switch (comp_.validator) {
      case ValidatorKind::none: return Verdict::pass();
      case ValidatorKind::domain: return problem_.validate ? problem_.validate(state) : Verdict::pass();
      case ValidatorKind::llm:
        try {
          return validate_state(metered_, state, CallSite{id, 0, 0}) ? Verdict::pass()
                                                                      : Verdict::fail("judged invalid");
        } catch (const EvaluationError& e) {
          return Verdict::fail(std::string("unreadable validity judgement: ") + e.what());
        }
    }
    return Verdict::pass();
  }

  /// Runs the expansion pipeline on `id`; returns the surviving scored children.
  /// With `merge`, thoughts equal to existing children are dropped.
  std::vector<NodeId> expand(NodeId id, bool merge) {
    if (budget_.max_expansions && stats().expansions >= *budget_.max_expansions) throw BudgetExhausted{};
    if (budget_.max_generated_thoughts && stats().generated_thoughts >= *budget_.max_generated_thoughts) {
      throw BudgetExhausted{};
    }
    ++stats().expansions;
    const int round = rounds_[id]++;
    const int tries = comp_.proposal.empty_retries + 1;
    const State state = tree().at(id).state;

    ProposalResult proposal;
    for (int retry = 0; retry < tries; ++retry) {
      proposal = propose_successors(state, comp_.proposal, metered_, comp_.constraints, id, round * tries + retry);
      stats().rejected_candidates += static_cast<long>(proposal.rejected.size());
      if (merge) {
        const auto& kids = tree().at(id).children;
        std::erase_if(proposal.thoughts, [&](const Thought& z) {
          return std::any_of(kids.begin(), kids.end(), [&](NodeId c) { return tree().at(c).state.last() == z; });
        });
      }
      if (!proposal.thoughts.empty()) break;
    }

    auto& thoughts = proposal.thoughts;
    if (budget_.max_generated_thoughts) {
      const auto allowance = static_cast<std::size_t>(*budget_.max_generated_thoughts - stats().generated_thoughts);
      if (thoughts.size() > allowance) thoughts.erase(thoughts.begin() + static_cast<std::ptrdiff_t>(allowance), thoughts.end());
    }

    std::vector<NodeId> created;
    for (Thought& z : thoughts) {
      const NodeId c = tree().add_child(id, std::move(z));
      rounds_.push_back(0);
      ++stats().generated_thoughts;
      created.push_back(c);
      log_created(c);
    }

    std::vector<NodeId> survivors;
    for (NodeId c : created) {
      if (Verdict v = check_valid(c); !v) {
        prune(c, NodeStatus::invalid, v.reason);
        continue;
      }
      if (auto key = world_key(c)) {
        const std::size_t depth = tree().at(c).depth();
        auto it = seen_.find(*key);
        if (it != seen_.end() && it->second <= depth) {
          prune(c, NodeStatus::pruned, "duplicate");
          continue;
        }
        seen_[*key] = depth;
      }
      goal_test_at_creation(c);
      score(c);
      survivors.push_back(c);
    }

    tree().at(id).set_status(NodeStatus::expanded);
    out_.log.append(event::kNodeExpanded, {{"node", id}, {"children", created}, {"round", round}});
    return survivors;
  }

  std::vector<ScoredId> scored(const std::vector<NodeId>& ids) {
    std::vector<ScoredId> out;
    for (NodeId id : ids) out.push_back({id, tree().at(id).f});
    return out;
  }

  /// Prunes everything in `all` that is not in `keep` with `reason`; returns `keep` in id order.
  std::vector<NodeId> retain(const std::vector<NodeId>& all, std::vector<NodeId> keep, const char* reason) {
    std::sort(keep.begin(), keep.end());
    for (NodeId id : all) {
      if (!std::binary_search(keep.begin(), keep.end(), id)) prune(id, NodeStatus::pruned, reason);
    }
    return keep;
  }

  std::vector<NodeId> local_pruning(const std::vector<NodeId>& children) {
    if (!config_.pruning) return children;
    if (const auto* p2 = std::get_if<LocalBranch>(&*config_.pruning)) {
      return retain(children, local_branch_prune(scored(children), p2->b), "localBranch");
    }
    if (const auto* p3 = std::get_if<LocalThreshold>(&*config_.pruning)) {
      return retain(children, threshold_prune(scored(children), p3->threshold), "threshold");
    }
    return children;
  }

  /// True when `id` is a solution; the first recognition records it.
  bool recognize(NodeId id) {
    Node& n = tree().at(id);
    if (n.status == NodeStatus::goal) return true;
    bool goal = n.goal_test;
    if (comp_.goal_test == GoalTestKind::llm) {
      auto it = judged_.find(id);
      if (it == judged_.end()) {
        const State state = n.state;
        bool verdict = false;
        try {
          verdict = test_goal(metered_, state, CallSite{id, 0, 0});
        } catch (const EvaluationError&) {
          verdict = false;
        }
        it = judged_.emplace(id, verdict).first;
      }
      goal = it->second;
    }
    if (!goal) return false;
    Node& g = tree().at(id);
    g.set_status(NodeStatus::goal);
    out_.solutions.push_back(id);
    out_.log.append(event::kGoalFound, {{"node", id}, {"depth", g.depth()}, {"f", g.f}});
    return true;
  }

  bool at_depth_limit(NodeId id) { return tree().at(id).depth() >= static_cast<std::size_t>(budget_.max_depth); }

  void best_first(NodeId root, bool lts) {
    using Entry = std::pair<double, NodeId>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
    auto key = [&](NodeId id) {
      const Node& n = tree().at(id);
      return lts ? lts_priority(n.depth(), n.h_success.value_or(0.0), comp_.heuristic.epsilon) : n.f;
    };
    frontier.emplace(key(root), root);
    while (!frontier.empty()) {
      const NodeId id = frontier.top().second;
      frontier.pop();
      if (tree().at(id).status != NodeStatus::open) continue;
      if (recognize(id)) {
        if (done()) return;
        continue;
      }
      if (at_depth_limit(id)) continue;
      for (NodeId c : local_pruning(expand(id, false))) frontier.emplace(key(c), c);
    }
  }

  void beam(NodeId root, int k) {
    if (recognize(root) && done()) return;
    std::vector<NodeId> layer{root};
    while (!layer.empty()) {
      std::vector<NodeId> next;
      for (NodeId id : layer) {
        if (tree().at(id).status != NodeStatus::open || at_depth_limit(id)) continue;
        for (NodeId c : expand(id, false)) next.push_back(c);
      }
      layer = retain(next, beam_prune(scored(next), k), "beam");
      std::vector<NodeId> open;
      for (NodeId id : layer) {
        if (recognize(id)) {
          if (done()) return;
        } else {
          open.push_back(id);
        }
      }
      layer = std::move(open);
    }
  }

  void dfs(NodeId root, const GreedyDfs& cfg) {
    std::vector<NodeId> stack{root};
    while (!stack.empty()) {
      const NodeId id = stack.back();
      stack.pop_back();
      if (tree().at(id).status != NodeStatus::open) continue;
      if (recognize(id)) {
        if (done()) return;
        continue;
      }
      if (at_depth_limit(id)) continue;
      auto children = scored(local_pruning(expand(id, false)));
      std::stable_sort(children.begin(), children.end(), by_f_then_id);
      std::vector<NodeId> keep;
      for (const auto& c : children) {
        if (c.f > cfg.threshold) {
          prune(c.id, NodeStatus::pruned, "threshold");
        } else if (keep.size() >= static_cast<std::size_t>(cfg.child_limit)) {
          prune(c.id, NodeStatus::pruned, "childLimit");
        } else {
          keep.push_back(c.id);
        }
      }
      for (auto it = keep.rbegin(); it != keep.rend(); ++it) stack.push_back(*it);
    }
  }

  bool selectable(NodeId id) {
    const NodeStatus s = tree().at(id).status;
    return s == NodeStatus::open || s == NodeStatus::expanded || s == NodeStatus::goal;
  }

  std::vector<NodeId> selectable_children(NodeId id) {
    std::vector<NodeId> out;
    for (NodeId c : tree().at(id).children) {
      if (selectable(c)) out.push_back(c);
    }
    return out;
  }

  void mcts(NodeId root, const Mcts& cfg) {
    if (recognize(root)) return;
    try {
      mcts_iterations(root, cfg);
    } catch (const BudgetExhausted&) {
      most_visited_plan(root);
      throw;
    }
    most_visited_plan(root);
  }

  void mcts_iterations(NodeId root, const Mcts& cfg) {
    for (int it = 0; it < cfg.iterations && !done(); ++it) {
      ++stats().iterations;
      std::vector<NodeId> path{root};
      double value = 0.0;
      bool solved = false;
      try {
        NodeId id = root;
        while (true) {
          if (tree().at(id).status == NodeStatus::goal) {
            value = 1.0;
            break;
          }
          if (at_depth_limit(id)) break;
          const bool first_visit = tree().at(id).status == NodeStatus::open;
          if (first_visit) expand(id, false);
          auto kids = selectable_children(id);
          if (kids.empty() && !first_visit && rounds_[id] <= cfg.max_resamples) {
            expand(id, true);
            kids = selectable_children(id);
          }
          if (kids.empty()) break;
          auto fresh = std::find_if(kids.begin(), kids.end(), [&](NodeId c) { return tree().at(c).visits == 0; });
          if (fresh != kids.end()) {
            id = *fresh;
            path.push_back(id);
            solved = recognize(id);
            value = solved ? 1.0 : tree().at(id).h_success.value_or(0.0);
            break;
          }
          const int parent_visits = tree().at(id).visits;
          NodeId best = kids.front();
          double best_score = -std::numeric_limits<double>::infinity();
          for (NodeId c : kids) {
            const Node& n = tree().at(c);
            const double s = uct_score(n.value_sum, n.visits, parent_visits, cfg.exploration_c);
            if (s > best_score) {
              best_score = s;
              best = c;
            }
          }
          id = best;
          path.push_back(id);
        }
      } catch (const GenerationError&) {
        ++stats().failed_iterations;
        continue;
      }
      for (NodeId id : path) {
        Node& n = tree().at(id);
        ++n.visits;
        n.value_sum += value;
      }
    }
  }

  /// Plan of an unsolved run: follow the most-visited child from the root.
  void most_visited_plan(NodeId root) {
    if (out_.solutions.empty()) {
      NodeId id = root;
      std::vector<Thought> plan;
      while (true) {
        std::optional<NodeId> best;
        for (NodeId c : tree().at(id).children) {
          const Node& n = tree().at(c);
          if (n.visits > 0 && (!best || n.visits > tree().at(*best).visits)) best = c;
        }
        if (!best) break;
        id = *best;
        plan.push_back(tree().at(id).state.last());
      }
      out_.plan = std::move(plan);
    }
  }

  const Problem& problem_;
  const StrategyConfig& config_;
  const SearchComponents& comp_;
  SearchResult& out_;
  const SearchBudget& budget_;
  MeteredBackend metered_;
  std::map<std::string, std::size_t> seen_;
  std::vector<int> rounds_;
  std::map<NodeId, bool> judged_;
};

}  // namespace

SearchResult run_search(const Problem& problem, const StrategyConfig& config, const SearchComponents& components) {
  StrategyConfig cfg = config;
  cfg.validate();
  if (!components.backend) throw ConfigError("search needs a backend");
  components.proposal.validate();
  components.heuristic.validate();

  SearchResult out;
  bool budget_hit = false;
  Engine engine(problem, cfg, components, out);
  try {
    engine.run();
  } catch (const BudgetExhausted&) {
    budget_hit = true;
  } catch (const GenerationError& e) {
    out.error = e.what();
  } catch (const EvaluationError& e) {
    out.error = e.what();
  } catch (const ScoringError& e) {
    out.error = e.what();
  } catch (const BackendError& e) {
    out.error = e.what();
  }

  if (!out.solutions.empty()) {
    out.outcome = Outcome::solved;
    out.goal = out.solutions.front();
    out.plan = reconstruct_path(out.tree, *out.goal);
  } else if (out.error) {
    out.outcome = Outcome::aborted;
  } else if (budget_hit) {
    out.outcome = Outcome::budget_exceeded;
  } else {
    out.outcome = Outcome::exhausted;
  }
  return out;
}

}  // namespace tot
