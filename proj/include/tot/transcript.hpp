#pragma once

// Backend call transcripts: record every request/reply pair as one JSON line,
// then serve the replies back in order to re-execute a run without a model.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tot/backend.hpp"

namespace tot {

struct TranscriptEntry {
  Interface which = Interface::generate;
  CallSite site;
  std::string rendered_state;
  nlohmann::json request;  ///< generation parameters; empty for judgement calls
  nlohmann::json reply;    ///< BackendReply or TextReply

  nlohmann::json to_json() const;
  static TranscriptEntry from_json(const nlohmann::json& j);
};

nlohmann::json reply_to_json(const BackendReply& reply);
BackendReply reply_from_json(const nlohmann::json& j);

/// Forwards to `inner` and keeps every exchange.
class RecordingBackend final : public Backend {
 public:
  explicit RecordingBackend(Backend& inner) : inner_(inner) {}

  const std::vector<TranscriptEntry>& entries() const noexcept { return entries_; }
  void write_jsonl(std::ostream& out) const;

  BackendReply generate(const State& s, const GenerationRequest& req, const CallSite& site) override;
  TextReply evaluate(const State& s, const CallSite& site) override;
  TextReply judge_goal(const State& s, const CallSite& site) override;
  TextReply judge_valid(const State& s, const CallSite& site) override;

 private:
  TextReply record_text(Interface which, const State& s, const CallSite& site, TextReply reply);

  Backend& inner_;
  std::vector<TranscriptEntry> entries_;
};

/// Serves recorded replies in order. A call whose interface, call site or
/// rendered state differs from the next entry raises BackendError(malformed).
class ReplayBackend final : public Backend {
 public:
  explicit ReplayBackend(std::vector<TranscriptEntry> entries) : entries_(std::move(entries)) {}
  static ReplayBackend from_jsonl(std::istream& in);

  std::size_t remaining() const noexcept { return entries_.size() - next_; }

  BackendReply generate(const State& s, const GenerationRequest& req, const CallSite& site) override;
  TextReply evaluate(const State& s, const CallSite& site) override;
  TextReply judge_goal(const State& s, const CallSite& site) override;
  TextReply judge_valid(const State& s, const CallSite& site) override;

 private:
  const TranscriptEntry& take(Interface which, const State& s, const CallSite& site);
  TextReply take_text(Interface which, const State& s, const CallSite& site);

  std::vector<TranscriptEntry> entries_;
  std::size_t next_ = 0;
};

}  // namespace tot
