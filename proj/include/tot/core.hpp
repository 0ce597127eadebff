#pragma once

/**
 * Thought-sequence states and the search tree.
 *
 * A State is the problem prompt followed by the thoughts appended so far.
 * Every Node stores its full State; parent links exist so that logs can be
 * compacted to one thought per node and expanded again with reconstruct_path.
 */

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tot {

using NodeId = std::uint32_t;

/// Number of whitespace-separated tokens in `text`.
int count_tokens(std::string_view text);

/// One reasoning step. Text is stored with a single trailing newline removed.
class Thought {
 public:
  Thought(std::string text, int token_count, std::optional<double> logprob = std::nullopt);

  /// Token count taken from whitespace splitting.
  static Thought from_text(std::string text, std::optional<double> logprob = std::nullopt);

  const std::string& text() const noexcept { return text_; }
  int token_count() const noexcept { return token_count_; }
  std::optional<double> logprob() const noexcept { return logprob_; }

  friend bool operator==(const Thought& a, const Thought& b) { return a.text_ == b.text_; }

 private:
  std::string text_;
  int token_count_;
  std::optional<double> logprob_;
};

class State {
 public:
  explicit State(std::string prompt) : prompt_(std::move(prompt)) {}
  State(std::string prompt, std::vector<Thought> thoughts)
      : prompt_(std::move(prompt)), thoughts_(std::move(thoughts)) {}

  const std::string& prompt() const noexcept { return prompt_; }
  std::span<const Thought> thoughts() const noexcept { return thoughts_; }
  std::size_t depth() const noexcept { return thoughts_.size(); }
  const Thought& last() const { return thoughts_.back(); }

  friend bool operator==(const State&, const State&) = default;

 private:
  std::string prompt_;
  std::vector<Thought> thoughts_;
};

/// Returns `s` with `z` appended. `s` is left untouched.
State extend_state(const State& s, Thought z);

/// Prompt followed by one thought per line.
std::string render_state(const State& s);

enum class NodeStatus { open, expanded, pruned, invalid, goal };

std::string_view to_string(NodeStatus status);

struct Node {
  NodeId id = 0;
  State state{""};
  std::optional<NodeId> parent;
  std::vector<NodeId> children;

  double g = 0.0;
  double h_cost = 0.0;
  std::optional<double> h_success;
  double f = 0.0;

  NodeStatus status = NodeStatus::open;
  /// Result of the cheap goal test at creation time.
  bool goal_test = false;

  int visits = 0;
  double value_sum = 0.0;
  long tokens_spent = 0;

  std::size_t depth() const noexcept { return state.depth(); }

  /// Moves the node to `next`. Only open nodes change status; an expanded node
  /// may be marked expanded again (MCTS re-expansion). Throws InvalidArgument
  /// on any other transition.
  void set_status(NodeStatus next);
};

/// Node store owned by one search run. Ids are dense and follow creation order.
class SearchTree {
 public:
  NodeId add_root(State root);
  NodeId add_child(NodeId parent, Thought thought);

  Node& at(NodeId id);
  const Node& at(NodeId id) const;
  bool contains(NodeId id) const noexcept { return id < nodes_.size(); }
  std::size_t size() const noexcept { return nodes_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }

  auto begin() const { return nodes_.begin(); }
  auto end() const { return nodes_.end(); }

 private:
  std::vector<Node> nodes_;
};

/// Thoughts on the edges from the root down to `id`.
std::vector<Thought> reconstruct_path(const SearchTree& tree, NodeId id);

struct SearchBudget {
  std::optional<long> max_expansions;
  std::optional<long> max_generated_thoughts;
  std::optional<long> max_tokens;
  int max_depth = 10;
  std::optional<long> max_backend_calls;

  /// Throws ConfigError when a present bound is below its minimum.
  void validate() const;
};

/// Maps a state to a canonical description of the world it induces.
using WorldProjector = std::function<std::optional<std::string>(const State&)>;

/// Absent projector means the domain has no recoverable world state.
std::optional<std::string> world_key(const State& s, const WorldProjector* projector);

}  // namespace tot
