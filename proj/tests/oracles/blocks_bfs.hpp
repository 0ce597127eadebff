#pragma once

// Independent Blocksworld oracle for tests. Worlds are sets of stacks
// (bottom to top); shares no code with the library's simulator.

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using Stack = std::vector<std::string>;
using World = std::vector<Stack>;

inline World normalize(World w) {
  std::erase_if(w, [](const Stack& s) { return s.empty(); });
  std::sort(w.begin(), w.end());
  return w;
}

/// block -> support ("Table" or a block) into stacks.
inline World world_from_supports(const std::map<std::string, std::string>& supports) {
  World w;
  std::map<std::string, std::string> above;
  for (const auto& [b, s] : supports) {
    if (s != "Table") above[s] = b;
  }
  for (const auto& [b, s] : supports) {
    if (s != "Table") continue;
    Stack st{b};
    while (above.count(st.back())) st.push_back(above.at(st.back()));
    w.push_back(st);
  }
  return normalize(w);
}

/// Holds "On(X,Y)" / "On(X,Table)" / "Clear(X)" facts.
inline bool holds(const World& w, const std::string& fact) {
  static const std::regex on(R"(On\((\w+),(\w+)\))"), clear(R"(Clear\((\w+)\))");
  std::smatch m;
  if (std::regex_match(fact, m, on)) {
    for (const auto& st : w) {
      for (std::size_t i = 0; i < st.size(); ++i) {
        if (st[i] != m[1].str()) continue;
        return i == 0 ? m[2].str() == "Table" : st[i - 1] == m[2].str();
      }
    }
    return false;
  }
  if (std::regex_match(fact, m, clear)) {
    for (const auto& st : w) {
      if (!st.empty() && st.back() == m[1].str()) return true;
    }
    return false;
  }
  return false;
}

inline bool satisfied(const World& w, const std::set<std::string>& goal) {
  return std::all_of(goal.begin(), goal.end(), [&](const std::string& f) { return holds(w, f); });
}

inline std::vector<World> successors(const World& w) {
  std::vector<World> out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i].size() > 1) {
      World n = w;
      n.push_back({n[i].back()});
      n[i].pop_back();
      out.push_back(normalize(n));
    }
    for (std::size_t j = 0; j < w.size(); ++j) {
      if (i == j) continue;
      World n = w;
      n[j].push_back(n[i].back());
      n[i].pop_back();
      out.push_back(normalize(n));
    }
  }
  return out;
}

/// Breadth-first optimal plan length; nullopt when the goal is unreachable.
inline std::optional<int> bfs_plan_length(const World& start, const std::set<std::string>& goal) {
  std::map<World, int> dist{{normalize(start), 0}};
  std::deque<World> queue{normalize(start)};
  while (!queue.empty()) {
    World w = queue.front();
    queue.pop_front();
    const int d = dist.at(w);
    if (satisfied(w, goal)) return d;
    for (auto& n : successors(w)) {
      if (dist.emplace(n, d + 1).second) queue.push_back(std::move(n));
    }
  }
  return std::nullopt;
}

}  // namespace oracle
