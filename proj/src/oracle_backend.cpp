#include "tot/oracle_backend.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tot/errors.hpp"

namespace tot {

std::string_view to_string(EvaluatorMode mode) {
  switch (mode) {
    case EvaluatorMode::steps: return "steps";
    case EvaluatorMode::rating: return "rating";
    case EvaluatorMode::categorical: return "categorical";
  }
  return "unknown";
}

EvaluatorMode evaluator_mode_from_string(std::string_view text) {
  for (EvaluatorMode mode : {EvaluatorMode::steps, EvaluatorMode::rating, EvaluatorMode::categorical}) {
    if (to_string(mode) == text) return mode;
  }
  throw ConfigError("unknown evaluator mode '" + std::string(text) + "'");
}

void OracleScript::add(std::vector<std::string> prefix, std::vector<std::string> candidates) {
  entries_[std::move(prefix)] = std::move(candidates);
}

const std::vector<std::string>* OracleScript::find(const State& s) const {
  std::vector<std::string> key;
  for (const Thought& z : s.thoughts()) key.push_back(z.text());
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

namespace {

long prompt_tokens(const GenerationRequest& req) {
  return count_tokens(req.rendered_state) + count_tokens(req.instruction);
}

long prompt_tokens(const State& s, std::string_view instruction) {
  return count_tokens(render_state(s)) + count_tokens(instruction);
}

std::string enumerate_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += '\n';
    out += std::to_string(i + 1) + ". " + items[i];
  }
  return out;
}

Completion make_completion(std::string text, const GenerationRequest& req, std::optional<double> logprob) {
  Completion c;
  c.text = truncate_at_stop(text, req.decoding.stop);
  c.token_count = count_tokens(c.text);
  if (req.want_logprobs) c.logprob = logprob;
  return c;
}

TextReply text_reply(const State& s, std::string_view instruction, std::string text) {
  TextReply reply;
  reply.usage.prompt_tokens = prompt_tokens(s, instruction);
  reply.usage.completion_tokens = count_tokens(text);
  reply.text = std::move(text);
  return reply;
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

}  // namespace

OracleBackend::OracleBackend(const Domain& domain, OracleScript script, EvaluatorMode mode)
    : domain_(domain), script_(std::move(script)), mode_(mode) {}

std::vector<std::pair<std::string, double>> OracleBackend::candidates(const State& s) const {
  std::vector<std::string> texts;
  if (const auto* scripted = script_.find(s)) {
    texts = *scripted;
  } else {
    try {
      texts = domain_.legal_thoughts(s);
    } catch (const InvalidStateError&) {
      return {};
    }
  }
  std::vector<double> weights(texts.size(), 1.0);
  if (weighting_) {
    for (std::size_t i = 0; i < texts.size(); ++i) weights[i] = std::max(weighting_(s, texts[i], i), 0.0);
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    out.emplace_back(std::move(texts[i]), std::min(std::log(weights[i] / total), 0.0));
  }
  return out;
}

BackendReply OracleBackend::generate(const State& s, const GenerationRequest& req, const CallSite& site) {
  auto cands = candidates(s);
  if (req.decoding.top_k && cands.size() > static_cast<std::size_t>(*req.decoding.top_k)) {
    cands.resize(static_cast<std::size_t>(*req.decoding.top_k));
  }
  BackendReply reply;
  reply.usage.prompt_tokens = prompt_tokens(req);
  if (req.enumerate) {
    std::vector<std::string> items;
    for (std::size_t i = 0; i < cands.size() && i < static_cast<std::size_t>(*req.enumerate); ++i) {
      items.push_back(cands[i].first);
    }
    if (!items.empty()) reply.completions.push_back(make_completion(enumerate_list(items), req, std::nullopt));
  } else {
    for (int k = 0; k < req.decoding.n; ++k) {
      const auto index = static_cast<std::size_t>(site.draw + k);
      if (index >= cands.size()) break;
      reply.completions.push_back(make_completion(cands[index].first, req, cands[index].second));
    }
  }
  for (const Completion& c : reply.completions) reply.usage.completion_tokens += c.token_count;
  return reply;
}

std::string OracleBackend::evaluation_text(const State& s, EvaluatorMode mode) const {
  std::optional<int> distance;
  try {
    distance = domain_.distance_to_goal(s);
  } catch (const InvalidStateError&) {
    distance = std::nullopt;
  }
  switch (mode) {
    case EvaluatorMode::steps: return distance ? std::to_string(*distance) : "inf";
    case EvaluatorMode::rating: {
      if (!distance) return "0";
      std::ostringstream out;
      out << 10.0 / (1.0 + *distance);
      return out.str();
    }
    case EvaluatorMode::categorical: return distance ? "sure" : "impossible";
  }
  return "inf";
}

TextReply OracleBackend::evaluate(const State& s, const CallSite&) {
  return text_reply(s, kEvaluateInstruction, evaluation_text(s, mode_));
}

TextReply OracleBackend::judge_goal(const State& s, const CallSite&) {
  return text_reply(s, kGoalInstruction, domain_.is_goal(s) ? "True" : "False");
}

TextReply OracleBackend::judge_valid(const State& s, const CallSite&) {
  return text_reply(s, kValidInstruction, domain_.validate(s).ok ? "True" : "False");
}

MockBackend::MockBackend(const Domain& domain, MockOptions options, OracleScript script)
    : domain_(domain), options_(options), oracle_(domain, std::move(script), options.mode) {
  if (options_.noise < 0.0 || options_.noise > 1.0) throw ConfigError("mock noise must lie in [0, 1]");
  if (options_.error_rate < 0.0 || options_.error_rate > 1.0) throw ConfigError("mock errorRate must lie in [0, 1]");
}

std::mt19937_64 MockBackend::stream(Interface which, const CallSite& site) const {
  return std::mt19937_64(mix_seed(options_.seed, static_cast<std::uint64_t>(which), site.node,
                                  static_cast<std::uint64_t>(site.draw), static_cast<std::uint64_t>(site.attempt)));
}

BackendReply MockBackend::generate(const State& s, const GenerationRequest& req, const CallSite& site) {
  auto rng = stream(Interface::generate, site);
  auto cands = oracle_.candidates(s);
  if (req.decoding.top_k && cands.size() > static_cast<std::size_t>(*req.decoding.top_k)) {
    cands.resize(static_cast<std::size_t>(*req.decoding.top_k));
  }
  std::vector<double> weights(cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i) {
    weights[i] = req.decoding.temperature > 0.0 ? std::exp(-static_cast<double>(i) / req.decoding.temperature)
                                                : (i == 0 ? 1.0 : 0.0);
  }
  if (req.decoding.top_p && !weights.empty()) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    double cumulative = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (cumulative >= *req.decoding.top_p * total) weights[i] = 0.0;
      cumulative += weights[i];
    }
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);

  std::vector<std::string> distractors;
  if (options_.noise > 0.0) {
    try {
      distractors = domain_.distractor_thoughts(s);
    } catch (const InvalidStateError&) {
    }
  }

  auto sample = [&]() -> std::optional<std::pair<std::string, double>> {
    const double u = uniform01(rng);
    if (u < options_.noise && !distractors.empty()) {
      const auto i = uniform_index(rng, distractors.size());
      return std::make_pair(distractors[i], std::log(options_.noise / static_cast<double>(distractors.size())));
    }
    if (cands.empty() || total <= 0.0) return std::nullopt;
    double target = uniform01(rng) * total;
    std::size_t pick = 0;
    for (; pick + 1 < cands.size(); ++pick) {
      if (target < weights[pick]) break;
      target -= weights[pick];
    }
    while (weights[pick] == 0.0 && pick > 0) --pick;
    const double keep = distractors.empty() ? 1.0 : 1.0 - options_.noise;
    return std::make_pair(cands[pick].first, std::min(std::log(keep * weights[pick] / total), 0.0));
  };

  BackendReply reply;
  reply.usage.prompt_tokens = count_tokens(req.rendered_state) + count_tokens(req.instruction);
  if (req.enumerate) {
    std::vector<std::string> items;
    for (int i = 0; i < *req.enumerate; ++i) {
      if (auto picked = sample()) items.push_back(picked->first);
    }
    if (!items.empty()) reply.completions.push_back(make_completion(enumerate_list(items), req, std::nullopt));
  } else {
    for (int k = 0; k < req.decoding.n; ++k) {
      if (auto picked = sample()) reply.completions.push_back(make_completion(picked->first, req, picked->second));
    }
  }
  for (const Completion& c : reply.completions) reply.usage.completion_tokens += c.token_count;
  return reply;
}

TextReply MockBackend::evaluate(const State& s, const CallSite& site) {
  auto rng = stream(Interface::evaluate, site);
  std::string text = oracle_.evaluation_text(s, options_.mode);
  if (uniform01(rng) < options_.error_rate) {
    switch (options_.mode) {
      case EvaluatorMode::steps: text = std::to_string(uniform_index(rng, 10)); break;
      case EvaluatorMode::rating: text = std::to_string(uniform_index(rng, 11)); break;
      case EvaluatorMode::categorical: {
        static const char* labels[] = {"sure", "maybe", "impossible"};
        text = labels[uniform_index(rng, 3)];
        break;
      }
    }
  }
  return text_reply(s, kEvaluateInstruction, std::move(text));
}

TextReply MockBackend::judge_goal(const State& s, const CallSite& site) { return oracle_.judge_goal(s, site); }

TextReply MockBackend::judge_valid(const State& s, const CallSite& site) { return oracle_.judge_valid(s, site); }

}  // namespace tot
