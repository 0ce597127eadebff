#include "tot/generation.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "tot/errors.hpp"

namespace tot {

std::string_view to_string(ProposalStrategy strategy) {
  switch (strategy) {
    case ProposalStrategy::independent: return "independent";
    case ProposalStrategy::diversity: return "diversity";
    case ProposalStrategy::enumerated: return "enumerated";
  }
  return "unknown";
}

void ProposalConfig::validate() const {
  if (branch < 1) throw ConfigError("branch count b must be >= 1");
  if (empty_retries < 0) throw ConfigError("empty_retries must be >= 0");
  if (strategy == ProposalStrategy::diversity) {
    if (!diversity) throw ConfigError("diversity sampling needs diversity parameters");
    if (diversity->ngram_n < 1) throw ConfigError("ngramN must be >= 1");
    if (diversity->overlap_penalty < 0.0) throw ConfigError("overlapPenalty must be >= 0");
    if (diversity->min_distinct < 0) throw ConfigError("minDistinct must be >= 0");
  }
  decoding.validate();
}

std::string_view constraint_tag(const Constraint& c) {
  static constexpr std::string_view tags[] = {"C1", "C2", "C3", "C4"};
  return tags[c.index()];
}

namespace {

struct Check {
  const Thought& candidate;
  const State& state;

  std::optional<std::string> operator()(const DomainActionConstraint& c) const {
    if (c.allowed && c.allowed(candidate.text())) return std::nullopt;
    return "C1: not in the action schema";
  }
  std::optional<std::string> operator()(const GrammarConstraint& c) const {
    try {
      if (c.parses && c.parses(candidate.text())) return std::nullopt;
      return "C2: does not parse";
    } catch (const std::exception& e) {
      return std::string("C2: parser failed: ") + e.what();
    }
  }
  std::optional<std::string> operator()(const LengthConstraint& c) const {
    if (candidate.token_count() <= c.max_tokens) return std::nullopt;
    return "C3: " + std::to_string(candidate.token_count()) + " tokens exceed " + std::to_string(c.max_tokens);
  }
  std::optional<std::string> operator()(const SemanticConstraint& c) const {
    if (!c.validator) return std::nullopt;
    Verdict v = c.validator(extend_state(state, candidate));
    if (v.ok) return std::nullopt;
    return "C4: " + v.reason;
  }
};

std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  for (std::string w; in >> w;) out.push_back(std::move(w));
  return out;
}

void dedupe(std::vector<Thought>& thoughts) {
  std::vector<Thought> unique;
  for (Thought& z : thoughts) {
    if (std::find(unique.begin(), unique.end(), z) == unique.end()) unique.push_back(std::move(z));
  }
  thoughts = std::move(unique);
}

std::optional<Thought> to_thought(const Completion& c) {
  if (count_tokens(c.text) == 0) return std::nullopt;
  const int tokens = c.token_count > 0 ? c.token_count : count_tokens(c.text);
  return Thought(c.text, tokens, c.logprob);
}

}  // namespace

std::vector<Thought> apply_constraints(const std::vector<Thought>& candidates, const ConstraintChain& chain,
                                       const State& s, std::vector<Rejection>* rejected) {
  std::vector<Thought> out;
  for (const Thought& z : candidates) {
    std::optional<std::string> reason;
    for (const Constraint& c : chain) {
      reason = std::visit(Check{z, s}, c);
      if (reason) break;
    }
    if (!reason) {
      out.push_back(z);
    } else if (rejected) {
      rejected->push_back({z.text(), *reason});
    }
  }
  return out;
}

std::vector<std::string> word_ngrams(std::string_view text, int n) {
  if (n < 1) throw InvalidArgument("n-gram order must be >= 1");
  const auto w = words(text);
  std::set<std::string> grams;
  auto join = [&](std::size_t from, std::size_t count) {
    std::string g;
    for (std::size_t i = from; i < from + count; ++i) {
      if (i > from) g += ' ';
      g += w[i];
    }
    return g;
  };
  const auto order = static_cast<std::size_t>(n);
  if (w.empty()) return {};
  if (w.size() < order) return {join(0, w.size())};
  for (std::size_t i = 0; i + order <= w.size(); ++i) grams.insert(join(i, order));
  return {grams.begin(), grams.end()};
}

std::vector<Thought> diversity_filter(const std::vector<Thought>& candidates, int ngram_n, int min_distinct) {
  std::set<std::string> seen;
  std::vector<Thought> out;
  for (const Thought& z : candidates) {
    const auto grams = word_ngrams(z.text(), ngram_n);
    const auto shared = std::count_if(grams.begin(), grams.end(), [&](const std::string& g) { return seen.count(g); });
    if (shared > static_cast<long>(grams.size()) - min_distinct) continue;
    seen.insert(grams.begin(), grams.end());
    out.push_back(z);
  }
  return out;
}

std::vector<std::string> parse_enumerated(std::string_view reply) {
  std::vector<std::string> out;
  std::istringstream in{std::string(reply)};
  for (std::string line; std::getline(in, line);) {
    std::size_t i = 0;
    auto skip_space = [&] {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    };
    skip_space();
    std::size_t digits = i;
    while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits]))) ++digits;
    if (digits > i && digits < line.size() && (line[digits] == '.' || line[digits] == ')') &&
        (digits + 1 == line.size() || std::isspace(static_cast<unsigned char>(line[digits + 1])))) {
      i = digits + 1;
    } else if (i < line.size() && (line[i] == '-' || line[i] == '*') &&
               (i + 1 == line.size() || std::isspace(static_cast<unsigned char>(line[i + 1])))) {
      ++i;
    }
    skip_space();
    std::size_t end = line.size();
    while (end > i && std::isspace(static_cast<unsigned char>(line[end - 1]))) --end;
    if (end > i) out.push_back(line.substr(i, end - i));
  }
  return out;
}

ProposalResult propose_successors(const State& s, const ProposalConfig& cfg, Backend& backend,
                                  const ConstraintChain& chain, NodeId node, int attempt) {
  ProposalResult result;
  std::vector<Thought> batch;
  const auto b = static_cast<std::size_t>(cfg.branch);

  GenerationRequest req;
  req.rendered_state = render_state(s);
  req.instruction = cfg.instruction;
  req.decoding = cfg.decoding;
  req.decoding.n = 1;

  try {
    if (cfg.strategy == ProposalStrategy::enumerated) {
      req.enumerate = cfg.branch;
      req.decoding.stop = {"\n\n"};
      req.instruction = "List " + std::to_string(cfg.branch) +
                        " distinct candidate steps, one per line. " + cfg.instruction;
      BackendReply reply = backend.generate(s, req, CallSite{node, 0, attempt});
      ++result.backend_calls;
      for (const Completion& c : reply.completions) {
        for (std::string& line : parse_enumerated(c.text)) batch.push_back(Thought::from_text(std::move(line)));
      }
      dedupe(batch);
    } else {
      const bool diverse = cfg.strategy == ProposalStrategy::diversity;
      if (diverse) req.decoding.presence_penalty = cfg.diversity->overlap_penalty;
      const int draws = diverse ? 2 * cfg.branch : cfg.branch;
      for (int draw = 0; draw < draws; ++draw) {
        BackendReply reply = backend.generate(s, req, CallSite{node, draw, attempt});
        ++result.backend_calls;
        for (const Completion& c : reply.completions) {
          if (auto z = to_thought(c)) batch.push_back(std::move(*z));
        }
      }
      dedupe(batch);
      if (diverse) batch = diversity_filter(batch, cfg.diversity->ngram_n, cfg.diversity->min_distinct);
    }
  } catch (const BackendError& e) {
    throw GenerationError(std::string("generation backend failed: ") + e.what());
  }

  if (batch.size() > b) batch.erase(batch.begin() + static_cast<std::ptrdiff_t>(b), batch.end());
  result.thoughts = apply_constraints(batch, chain, s, &result.rejected);
  return result;
}

}  // namespace tot
