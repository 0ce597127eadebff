#pragma once

// Append-only event log of one search run. Events carry no wall-clock data,
// so equal runs produce byte-identical logs.

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace tot {

namespace event {
inline constexpr const char* kNodeCreated = "nodeCreated";
inline constexpr const char* kNodeScored = "nodeScored";
inline constexpr const char* kNodePruned = "nodePruned";
inline constexpr const char* kNodeExpanded = "nodeExpanded";
inline constexpr const char* kGoalFound = "goalFound";
inline constexpr const char* kBackendCall = "backendCall";
}  // namespace event

class RunLog {
 public:
  /// Appends `fields` with "seq" and "event" set.
  void append(const char* type, nlohmann::json fields);

  const std::vector<nlohmann::json>& events() const noexcept { return events_; }
  std::size_t size() const noexcept { return events_.size(); }

  void write_jsonl(std::ostream& out) const;
  std::string to_jsonl() const;
  static RunLog read_jsonl(std::istream& in);

 private:
  std::vector<nlohmann::json> events_;
};

}  // namespace tot
