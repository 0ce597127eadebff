#include "tot/core.hpp"

#include <algorithm>
#include <cctype>

#include "tot/errors.hpp"

namespace tot {

int count_tokens(std::string_view text) {
  int count = 0;
  bool in_token = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++count;
    }
  }
  return count;
}

namespace {

std::string trim_one_newline(std::string text) {
  if (!text.empty() && text.back() == '\n') text.pop_back();
  return text;
}

}  // namespace

Thought::Thought(std::string text, int token_count, std::optional<double> logprob)
    : text_(trim_one_newline(std::move(text))), token_count_(token_count), logprob_(logprob) {
  if (text_.empty()) throw InvalidArgument("thought text is empty");
  if (token_count_ < 1) throw InvalidArgument("thought token count must be >= 1");
  if (logprob_ && *logprob_ > 0.0) throw InvalidArgument("thought logprob must be <= 0");
}

Thought Thought::from_text(std::string text, std::optional<double> logprob) {
  int tokens = count_tokens(text);
  return Thought(std::move(text), std::max(tokens, 1), logprob);
}

State extend_state(const State& s, Thought z) {
  std::vector<Thought> thoughts(s.thoughts().begin(), s.thoughts().end());
  thoughts.push_back(std::move(z));
  return State(s.prompt(), std::move(thoughts));
}

std::string render_state(const State& s) {
  std::string out = s.prompt();
  for (const Thought& z : s.thoughts()) {
    out += '\n';
    out += z.text();
  }
  return out;
}

std::string_view to_string(NodeStatus status) {
  switch (status) {
    case NodeStatus::open: return "open";
    case NodeStatus::expanded: return "expanded";
    case NodeStatus::pruned: return "pruned";
    case NodeStatus::invalid: return "invalid";
    case NodeStatus::goal: return "goal";
  }
  return "unknown";
}

void Node::set_status(NodeStatus next) {
  if (status == next && next == NodeStatus::expanded) return;
  if (status != NodeStatus::open) {
    throw InvalidArgument("node " + std::to_string(id) + ": illegal status transition " +
                          std::string(to_string(status)) + " -> " + std::string(to_string(next)));
  }
  status = next;
}

NodeId SearchTree::add_root(State root) {
  if (!nodes_.empty()) throw InvalidArgument("search tree already has a root");
  if (root.depth() != 0) throw InvalidArgument("root state must have no thoughts");
  Node node;
  node.id = 0;
  node.state = std::move(root);
  nodes_.push_back(std::move(node));
  return 0;
}

NodeId SearchTree::add_child(NodeId parent, Thought thought) {
  const NodeId id = static_cast<NodeId>(nodes_.size());
  Node node;
  node.id = id;
  node.state = extend_state(at(parent).state, std::move(thought));
  node.parent = parent;
  nodes_.push_back(std::move(node));
  nodes_[parent].children.push_back(id);
  return id;
}

Node& SearchTree::at(NodeId id) {
  if (!contains(id)) throw LookupError("unknown node id " + std::to_string(id));
  return nodes_[id];
}

const Node& SearchTree::at(NodeId id) const {
  if (!contains(id)) throw LookupError("unknown node id " + std::to_string(id));
  return nodes_[id];
}

std::vector<Thought> reconstruct_path(const SearchTree& tree, NodeId id) {
  std::vector<Thought> path;
  const Node* node = &tree.at(id);
  while (node->parent) {
    path.push_back(node->state.last());
    node = &tree.at(*node->parent);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

void SearchBudget::validate() const {
  auto check = [](const std::optional<long>& bound, const char* name) {
    if (bound && *bound < 0) throw ConfigError(std::string(name) + " must be >= 0");
  };
  check(max_expansions, "maxExpansions");
  check(max_generated_thoughts, "maxGeneratedThoughts");
  check(max_tokens, "maxTokens");
  check(max_backend_calls, "maxBackendCalls");
  if (max_depth < 1) throw ConfigError("maxDepth must be >= 1");
}

std::optional<std::string> world_key(const State& s, const WorldProjector* projector) {
  if (projector == nullptr || !*projector) return std::nullopt;
  return (*projector)(s);
}

}  // namespace tot
