#include "tot/transcript.hpp"

#include <istream>
#include <ostream>

#include "tot/errors.hpp"

namespace tot {

using nlohmann::json;

namespace {

json decoding_to_json(const Decoding& d) {
  json j = {{"temperature", d.temperature}, {"n", d.n}, {"maxTokens", d.max_tokens}, {"stop", d.stop}};
  if (d.top_k) j["topK"] = *d.top_k;
  if (d.top_p) j["topP"] = *d.top_p;
  return j;
}

json request_to_json(const GenerationRequest& req) {
  json j = {{"instruction", req.instruction}, {"decoding", decoding_to_json(req.decoding)},
            {"wantLogprobs", req.want_logprobs}};
  if (req.enumerate) j["enumerate"] = *req.enumerate;
  return j;
}

json usage_to_json(const Usage& u) {
  return {{"promptTokens", u.prompt_tokens}, {"completionTokens", u.completion_tokens}};
}

Usage usage_from_json(const json& j) {
  return Usage{j.at("promptTokens").get<long>(), j.at("completionTokens").get<long>()};
}

}  // namespace

json reply_to_json(const BackendReply& reply) {
  json completions = json::array();
  for (const Completion& c : reply.completions) {
    json entry = {{"text", c.text}, {"tokenCount", c.token_count}};
    if (c.logprob) entry["logprob"] = *c.logprob;
    completions.push_back(std::move(entry));
  }
  return {{"completions", completions}, {"usage", usage_to_json(reply.usage)}};
}

BackendReply reply_from_json(const json& j) {
  BackendReply reply;
  for (const json& entry : j.at("completions")) {
    Completion c;
    c.text = entry.at("text").get<std::string>();
    c.token_count = entry.at("tokenCount").get<int>();
    if (entry.contains("logprob")) c.logprob = entry["logprob"].get<double>();
    reply.completions.push_back(std::move(c));
  }
  reply.usage = usage_from_json(j.at("usage"));
  return reply;
}

json TranscriptEntry::to_json() const {
  return {{"interface", std::string(to_string(which))},
          {"node", site.node},
          {"draw", site.draw},
          {"attempt", site.attempt},
          {"renderedState", rendered_state},
          {"request", request},
          {"reply", reply}};
}

TranscriptEntry TranscriptEntry::from_json(const json& j) {
  TranscriptEntry e;
  e.which = interface_from_string(j.at("interface").get<std::string>());
  e.site = CallSite{j.at("node").get<NodeId>(), j.at("draw").get<int>(), j.at("attempt").get<int>()};
  e.rendered_state = j.at("renderedState").get<std::string>();
  e.request = j.value("request", json());
  e.reply = j.at("reply");
  return e;
}

void RecordingBackend::write_jsonl(std::ostream& out) const {
  for (const TranscriptEntry& e : entries_) out << e.to_json().dump() << '\n';
}

BackendReply RecordingBackend::generate(const State& s, const GenerationRequest& req, const CallSite& site) {
  BackendReply reply = inner_.generate(s, req, site);
  entries_.push_back({Interface::generate, site, render_state(s), request_to_json(req), reply_to_json(reply)});
  return reply;
}

TextReply RecordingBackend::record_text(Interface which, const State& s, const CallSite& site, TextReply reply) {
  entries_.push_back({which, site, render_state(s), json(),
                      json{{"text", reply.text}, {"usage", usage_to_json(reply.usage)}}});
  return reply;
}

TextReply RecordingBackend::evaluate(const State& s, const CallSite& site) {
  return record_text(Interface::evaluate, s, site, inner_.evaluate(s, site));
}

TextReply RecordingBackend::judge_goal(const State& s, const CallSite& site) {
  return record_text(Interface::judge_goal, s, site, inner_.judge_goal(s, site));
}

TextReply RecordingBackend::judge_valid(const State& s, const CallSite& site) {
  return record_text(Interface::judge_valid, s, site, inner_.judge_valid(s, site));
}

ReplayBackend ReplayBackend::from_jsonl(std::istream& in) {
  std::vector<TranscriptEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      entries.push_back(TranscriptEntry::from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError("transcript line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return ReplayBackend(std::move(entries));
}

const TranscriptEntry& ReplayBackend::take(Interface which, const State& s, const CallSite& site) {
  if (next_ >= entries_.size()) {
    throw BackendError(BackendError::Kind::exhausted_transcript, "transcript exhausted", false);
  }
  const TranscriptEntry& e = entries_[next_];
  if (e.which != which || e.site.node != site.node || e.site.draw != site.draw || e.site.attempt != site.attempt ||
      e.rendered_state != render_state(s)) {
    throw BackendError(BackendError::Kind::malformed,
                       "transcript mismatch at entry " + std::to_string(next_) + " (expected " +
                           std::string(to_string(e.which)) + " for node " + std::to_string(e.site.node) + ")",
                       false);
  }
  ++next_;
  return e;
}

BackendReply ReplayBackend::generate(const State& s, const GenerationRequest&, const CallSite& site) {
  return reply_from_json(take(Interface::generate, s, site).reply);
}

TextReply ReplayBackend::take_text(Interface which, const State& s, const CallSite& site) {
  const TranscriptEntry& e = take(which, s, site);
  return TextReply{e.reply.at("text").get<std::string>(), usage_from_json(e.reply.at("usage"))};
}

TextReply ReplayBackend::evaluate(const State& s, const CallSite& site) {
  return take_text(Interface::evaluate, s, site);
}

TextReply ReplayBackend::judge_goal(const State& s, const CallSite& site) {
  return take_text(Interface::judge_goal, s, site);
}

TextReply ReplayBackend::judge_valid(const State& s, const CallSite& site) {
  return take_text(Interface::judge_valid, s, site);
}

}  // namespace tot
