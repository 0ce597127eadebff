#include "tot/blocksworld.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <regex>
#include <unordered_map>

#include "tot/errors.hpp"

namespace tot::blocks {

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

bool is_table(std::string_view name) { return iequals(name, kTable); }

// Table after every block name.
bool support_less(const std::string& a, const std::string& b) {
  const bool ta = a == kTable, tb = b == kTable;
  if (ta != tb) return tb;
  return a < b;
}

std::string trim(std::string_view text) {
  std::size_t b = 0, e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  return std::string(text.substr(b, e - b));
}

}  // namespace

bool valid_block_name(std::string_view name) {
  if (name.empty() || !std::isalpha(static_cast<unsigned char>(name[0]))) return false;
  if (is_table(name)) return false;
  return std::all_of(name.begin(), name.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)); });
}

BlocksAction BlocksAction::make(std::string block, std::string from, std::string to) {
  if (block == to) throw InvalidArgument("block " + block + " cannot be placed on itself");
  if (from == to) throw InvalidArgument("move of " + block + " has identical source and target " + to);
  if (block == from) throw InvalidArgument("block " + block + " cannot rest on itself");
  return BlocksAction{std::move(block), std::move(from), std::move(to)};
}

BlocksAction parse_blocks_action(std::string_view text) {
  // Quote marks: ` ' " and the UTF-8 curly quotes.
  static const std::string q = R"((?:`|'|"|‘|’|“|”)?)";
  static const std::string name = q + "([A-Za-z][A-Za-z0-9]*)" + q;
  static const std::string place = "(?:the\\s+table|table|(?:block\\s+)?" + name + ")";
  static const std::regex pattern("^\\s*pick(?:\\s+up)?\\s+block\\s+" + name + "\\s+from\\s+" + place +
                                      "\\s+and\\s+(?:place|put)\\s+it\\s+on\\s+" + place + "\\s*\\.?\\s*$",
                                  std::regex::icase);
  const std::string input = trim(text);
  std::smatch m;
  if (!std::regex_match(input, m, pattern)) {
    throw ParseError("not a blocksworld action: '" + std::string(text) + "'");
  }
  std::string block = m[1].str();
  std::string from = m[2].matched ? m[2].str() : std::string(kTable);
  std::string to = m[3].matched ? m[3].str() : std::string(kTable);
  for (const std::string* n : {&block, &from, &to}) {
    if (*n != kTable && is_table(*n)) throw ParseError("'table' is not a block name");
  }
  try {
    return BlocksAction::make(std::move(block), std::move(from), std::move(to));
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what());
  }
}

std::string render_blocks_action(const BlocksAction& action) {
  auto place = [](const std::string& where) {
    return where == kTable ? std::string("the table") : "block `" + where + "'";
  };
  return "Pick block `" + action.block + "' from " + place(action.from) + " and place it on " +
         place(action.to) + ".";
}

std::string on_fact(std::string_view block, std::string_view support) {
  return "On(" + std::string(block) + "," + std::string(support) + ")";
}

std::string clear_fact(std::string_view block) { return "Clear(" + std::string(block) + ")"; }

std::string canonical_fact(std::string_view text) {
  static const std::regex on(R"(^\s*on\s*\(\s*([A-Za-z][A-Za-z0-9]*)\s*,\s*([A-Za-z][A-Za-z0-9]*)\s*\)\s*$)",
                             std::regex::icase);
  static const std::regex clear(R"(^\s*clear\s*\(\s*([A-Za-z][A-Za-z0-9]*)\s*\)\s*$)", std::regex::icase);
  const std::string input(text);
  std::smatch m;
  if (std::regex_match(input, m, on)) {
    const std::string support = is_table(m[2].str()) ? std::string(kTable) : m[2].str();
    if (is_table(m[1].str())) throw ParseError("the table cannot be stacked: '" + input + "'");
    return on_fact(m[1].str(), support);
  }
  if (std::regex_match(input, m, clear)) {
    if (is_table(m[1].str())) throw ParseError("Clear(Table) is not a fact: '" + input + "'");
    return clear_fact(m[1].str());
  }
  throw ParseError("not a blocksworld fact: '" + input + "'");
}

BlocksConfig BlocksConfig::from_facts(const std::vector<std::string>& facts) {
  std::map<std::string, std::string> supports;
  std::vector<std::string> clears;
  for (const std::string& raw : facts) {
    const std::string fact = canonical_fact(raw);
    if (fact.rfind("On(", 0) == 0) {
      const auto comma = fact.find(',');
      std::string block = fact.substr(3, comma - 3);
      std::string support = fact.substr(comma + 1, fact.size() - comma - 2);
      if (!supports.emplace(block, support).second) {
        throw InvalidArgument("block " + block + " has more than one support");
      }
    } else {
      clears.push_back(fact.substr(6, fact.size() - 7));
    }
  }
  BlocksConfig cfg = from_supports(std::move(supports));
  for (const std::string& block : clears) {
    if (!cfg.has_block(block)) throw InvalidArgument("Clear(" + block + ") names a block without a support");
    if (!cfg.clear(block)) throw InvalidArgument("Clear(" + block + ") contradicts a block stacked on it");
  }
  return cfg;
}

BlocksConfig BlocksConfig::from_supports(std::map<std::string, std::string> supports) {
  for (const auto& [block, support] : supports) {
    if (!valid_block_name(block)) throw InvalidArgument("invalid block name '" + block + "'");
    if (support == block) throw InvalidArgument("block " + block + " rests on itself");
    if (support != kTable && !supports.count(support)) {
      throw InvalidArgument("block " + block + " rests on unknown block " + support);
    }
  }
  std::map<std::string, int> load;
  for (const auto& [block, support] : supports) {
    if (support != kTable && ++load[support] > 1) {
      throw InvalidArgument("more than one block rests on " + support);
    }
  }
  for (const auto& [block, support] : supports) {
    std::string cur = support;
    for (std::size_t steps = 0; cur != kTable; ++steps) {
      if (steps > supports.size()) throw InvalidArgument("cycle in On relation through " + block);
      cur = supports.at(cur);
    }
  }
  BlocksConfig cfg;
  cfg.supports_ = std::move(supports);
  return cfg;
}

std::vector<std::string> BlocksConfig::blocks() const {
  std::vector<std::string> out;
  for (const auto& [block, support] : supports_) out.push_back(block);
  return out;
}

bool BlocksConfig::has_block(std::string_view name) const { return supports_.count(std::string(name)) > 0; }

bool BlocksConfig::on(std::string_view block, std::string_view support) const {
  auto it = supports_.find(std::string(block));
  return it != supports_.end() && it->second == support;
}

bool BlocksConfig::clear(std::string_view name) const {
  if (name == kTable) return true;
  return std::none_of(supports_.begin(), supports_.end(), [&](const auto& kv) { return kv.second == name; });
}

std::set<std::string> BlocksConfig::facts() const {
  std::set<std::string> out;
  for (const auto& [block, support] : supports_) {
    out.insert(on_fact(block, support));
    if (clear(block)) out.insert(clear_fact(block));
  }
  return out;
}

std::string BlocksConfig::key() const {
  std::string out;
  for (const std::string& fact : facts()) {
    if (!out.empty()) out += ", ";
    out += fact;
  }
  return out;
}

BlocksConfig apply_blocks_action(const BlocksConfig& cfg, const BlocksAction& action) {
  if (!cfg.has_block(action.block)) throw PreconditionError("Block(" + action.block + ")");
  if (action.to != kTable && !cfg.has_block(action.to)) throw PreconditionError("Block(" + action.to + ")");
  if (action.block == action.to || action.from == action.to) {
    throw PreconditionError("Distinct(" + action.from + "," + action.to + ")");
  }
  if (!cfg.clear(action.block)) throw PreconditionError(clear_fact(action.block));
  if (!cfg.on(action.block, action.from)) throw PreconditionError(on_fact(action.block, action.from));
  if (!cfg.clear(action.to)) throw PreconditionError(clear_fact(action.to));
  auto supports = cfg.supports();
  supports[action.block] = action.to;
  return BlocksConfig::from_supports(std::move(supports));
}

bool blocks_goal_satisfied(const BlocksConfig& cfg, const std::set<std::string>& goal) {
  const auto facts = cfg.facts();
  return std::includes(facts.begin(), facts.end(), goal.begin(), goal.end());
}

std::vector<BlocksAction> enumerate_legal_actions(const BlocksConfig& cfg) {
  std::vector<BlocksAction> out;
  std::vector<std::string> targets = cfg.blocks();
  targets.push_back(std::string(kTable));
  std::sort(targets.begin(), targets.end(), support_less);
  for (const auto& [block, from] : cfg.supports()) {
    if (!cfg.clear(block)) continue;
    for (const std::string& to : targets) {
      if (to == block || to == from || !cfg.clear(to)) continue;
      out.push_back(BlocksAction{block, from, to});
    }
  }
  return out;
}

std::optional<int> shortest_plan_length(const BlocksConfig& start, const std::set<std::string>& goal) {
  if (blocks_goal_satisfied(start, goal)) return 0;
  std::unordered_map<std::string, int> dist{{start.key(), 0}};
  std::deque<BlocksConfig> queue{start};
  while (!queue.empty()) {
    BlocksConfig cur = std::move(queue.front());
    queue.pop_front();
    const int d = dist.at(cur.key());
    for (const BlocksAction& a : enumerate_legal_actions(cur)) {
      BlocksConfig next = apply_blocks_action(cur, a);
      if (!dist.emplace(next.key(), d + 1).second) continue;
      if (blocks_goal_satisfied(next, goal)) return d + 1;
      queue.push_back(std::move(next));
    }
  }
  return std::nullopt;
}

BlocksConfig random_config(int n_blocks, std::mt19937_64& rng) {
  if (n_blocks < 1 || n_blocks > 26) throw InvalidArgument("random_config supports 1..26 blocks");
  std::vector<std::string> names;
  for (int i = 0; i < n_blocks; ++i) names.emplace_back(1, static_cast<char>('A' + i));
  std::shuffle(names.begin(), names.end(), rng);
  std::vector<std::vector<std::string>> stacks;
  for (const std::string& name : names) {
    std::uniform_int_distribution<std::size_t> pick(0, stacks.size());
    const std::size_t slot = pick(rng);
    if (slot == stacks.size()) {
      stacks.push_back({name});
    } else {
      stacks[slot].push_back(name);
    }
  }
  std::map<std::string, std::string> supports;
  for (const auto& stack : stacks) {
    for (std::size_t i = 0; i < stack.size(); ++i) {
      supports[stack[i]] = i == 0 ? std::string(kTable) : stack[i - 1];
    }
  }
  return BlocksConfig::from_supports(std::move(supports));
}

std::string describe_violation(std::string_view fact) {
  static const std::regex on(R"(^On\(([^,]+),([^)]+)\)$)");
  static const std::regex one(R"(^(\w+)\(([^)]+)\)$)");
  const std::string text(fact);
  std::smatch m;
  if (std::regex_match(text, m, on)) {
    return "block " + m[1].str() + " is not on " + (m[2].str() == kTable ? "the table" : m[2].str());
  }
  if (std::regex_match(text, m, one)) {
    if (m[1].str() == "Clear") return "block " + m[2].str() + " is not clear";
    if (m[1].str() == "Block") return "unknown block " + m[2].str();
  }
  return text + " does not hold";
}

namespace {

std::string describe_config(const BlocksConfig& cfg) {
  std::string out;
  for (const auto& [block, support] : cfg.supports()) {
    if (!out.empty()) out += ", ";
    out += on_fact(block, support);
  }
  for (const std::string& block : cfg.blocks()) {
    if (cfg.clear(block)) out += ", " + clear_fact(block);
  }
  return out;
}

}  // namespace

BlocksworldDomain::BlocksworldDomain(BlocksConfig initial, std::set<std::string> goal)
    : initial_(std::move(initial)) {
  for (const std::string& fact : goal) goal_.insert(canonical_fact(fact));
  std::string goal_text;
  for (const std::string& fact : goal_) {
    if (!goal_text.empty()) goal_text += ", ";
    goal_text += fact;
  }
  prompt_ =
      "Blocks world. Move one clear block per step, onto the table or onto another clear block. Start: " +
      describe_config(initial_) + ". Goal: " + goal_text + ". Plan:";
}

std::string BlocksworldDomain::step_instruction() const {
  return "Give the next move as `pick block ? from ? and place it on ?'.";
}

bool BlocksworldDomain::accepts_action(std::string_view text) const {
  try {
    parse_blocks_action(text);
    return true;
  } catch (const ParseError&) {
    return false;
  }
}

BlocksConfig BlocksworldDomain::simulate(const State& s) const {
  BlocksConfig cfg = initial_;
  std::size_t depth = 0;
  for (const Thought& z : s.thoughts()) {
    ++depth;
    try {
      cfg = apply_blocks_action(cfg, parse_blocks_action(z.text()));
    } catch (const ParseError& e) {
      throw InvalidStateError("step " + std::to_string(depth) + ": " + e.what());
    } catch (const PreconditionError& e) {
      throw InvalidStateError("step " + std::to_string(depth) + ": " + describe_violation(e.fact()) + " (" +
                              e.fact() + " fails)");
    }
  }
  return cfg;
}

Verdict BlocksworldDomain::validate(const State& s) const {
  try {
    simulate(s);
    return Verdict::pass();
  } catch (const InvalidStateError& e) {
    return Verdict::fail(e.what());
  }
}

bool BlocksworldDomain::is_goal(const State& s) const {
  try {
    return blocks_goal_satisfied(simulate(s), goal_);
  } catch (const InvalidStateError&) {
    return false;
  }
}

std::vector<std::string> BlocksworldDomain::legal_thoughts(const State& s) const {
  std::vector<std::string> out;
  for (const BlocksAction& a : enumerate_legal_actions(simulate(s))) out.push_back(render_blocks_action(a));
  return out;
}

std::vector<std::string> BlocksworldDomain::distractor_thoughts(const State& s) const {
  const BlocksConfig cfg = simulate(s);
  std::vector<std::string> places = cfg.blocks();
  places.push_back(std::string(kTable));
  std::vector<std::string> out;
  for (const std::string& block : cfg.blocks()) {
    for (const std::string& from : places) {
      for (const std::string& to : places) {
        if (block == to || block == from || from == to) continue;
        BlocksAction a{block, from, to};
        try {
          apply_blocks_action(cfg, a);
        } catch (const PreconditionError&) {
          out.push_back(render_blocks_action(a));
        }
      }
    }
  }
  return out;
}

std::optional<int> BlocksworldDomain::distance_to_goal(const State& s) const {
  const BlocksConfig cfg = simulate(s);
  const std::string key = cfg.key();
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = distance_cache_.find(key); it != distance_cache_.end()) return it->second;
  }
  auto d = shortest_plan_length(cfg, goal_);
  std::lock_guard lock(cache_mutex_);
  distance_cache_.emplace(key, d);
  return d;
}

std::optional<std::string> BlocksworldDomain::world_key(const State& s) const { return simulate(s).key(); }

}  // namespace tot::blocks
