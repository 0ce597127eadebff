#pragma once

// Blocksworld with a single move action: pick a clear block from its support
// and place it on the table or on another clear block.

#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tot/domain.hpp"

namespace tot::blocks {

inline constexpr std::string_view kTable = "Table";

/// True for names matching [A-Za-z][A-Za-z0-9]* other than "table".
bool valid_block_name(std::string_view name);

struct BlocksAction {
  std::string block;
  std::string from;
  std::string to;

  /// Throws InvalidArgument when block == to or from == to.
  static BlocksAction make(std::string block, std::string from, std::string to);

  friend bool operator==(const BlocksAction&, const BlocksAction&) = default;
};

/// Case-insensitive match of "pick block X from Y and place it on Z", where Y
/// and Z are "the table" or an optionally "block"-prefixed name. Quotes around
/// names may be straight, curly or backtick. Throws ParseError.
BlocksAction parse_blocks_action(std::string_view text);

/// "Pick block `A' from block `B' and place it on the table."
std::string render_blocks_action(const BlocksAction& action);

/// Canonical fact text: "On(A,B)", "On(A,Table)", "Clear(A)".
std::string on_fact(std::string_view block, std::string_view support);
std::string clear_fact(std::string_view block);

/// Normalises spacing and the spelling of Table. Throws ParseError.
std::string canonical_fact(std::string_view text);

class BlocksConfig {
 public:
  /// Builds from On/Clear facts. Every block needs exactly one On fact; listed
  /// Clear facts must hold. Throws InvalidArgument on inconsistency or cycles.
  static BlocksConfig from_facts(const std::vector<std::string>& facts);

  /// block -> support ("Table" or a block name).
  static BlocksConfig from_supports(std::map<std::string, std::string> supports);

  const std::map<std::string, std::string>& supports() const noexcept { return supports_; }
  std::vector<std::string> blocks() const;
  bool has_block(std::string_view name) const;
  bool on(std::string_view block, std::string_view support) const;
  /// The table is always clear.
  bool clear(std::string_view name) const;

  std::set<std::string> facts() const;
  /// Sorted facts joined by ", ".
  std::string key() const;

  friend bool operator==(const BlocksConfig&, const BlocksConfig&) = default;

 private:
  std::map<std::string, std::string> supports_;
};

/// Throws PreconditionError naming the violated fact.
BlocksConfig apply_blocks_action(const BlocksConfig& cfg, const BlocksAction& action);

bool blocks_goal_satisfied(const BlocksConfig& cfg, const std::set<std::string>& goal);

/// Applicable actions ordered by (block, to); the table sorts after every block.
std::vector<BlocksAction> enumerate_legal_actions(const BlocksConfig& cfg);

/// Breadth-first plan length to the goal, nullopt if unreachable.
std::optional<int> shortest_plan_length(const BlocksConfig& start, const std::set<std::string>& goal);

/// Uniformly random stacking of blocks named A, B, C, ...
BlocksConfig random_config(int n_blocks, std::mt19937_64& rng);

/// Readable reason for a PreconditionError fact, e.g. "block A is not clear".
std::string describe_violation(std::string_view fact);

class BlocksworldDomain final : public Domain {
 public:
  BlocksworldDomain(BlocksConfig initial, std::set<std::string> goal);

  const BlocksConfig& initial() const noexcept { return initial_; }
  const std::set<std::string>& goal() const noexcept { return goal_; }

  std::string_view name() const override { return "blocksworld"; }
  const std::string& prompt() const override { return prompt_; }
  std::string step_instruction() const override;
  bool accepts_action(std::string_view text) const override;
  Verdict validate(const State& s) const override;
  bool is_goal(const State& s) const override;
  std::vector<std::string> legal_thoughts(const State& s) const override;
  std::vector<std::string> distractor_thoughts(const State& s) const override;
  std::optional<int> distance_to_goal(const State& s) const override;
  std::optional<std::string> world_key(const State& s) const override;

  /// Simulates the thoughts of `s`. Throws InvalidStateError.
  BlocksConfig simulate(const State& s) const;

 private:
  BlocksConfig initial_;
  std::set<std::string> goal_;
  std::string prompt_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::string, std::optional<int>> distance_cache_;
};

}  // namespace tot::blocks
