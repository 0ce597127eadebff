#include "tot/run_log.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "tot/errors.hpp"

namespace tot {

void RunLog::append(const char* type, nlohmann::json fields) {
  fields["seq"] = events_.size();
  fields["event"] = type;
  events_.push_back(std::move(fields));
}

void RunLog::write_jsonl(std::ostream& out) const {
  for (const auto& e : events_) out << e.dump() << '\n';
}

std::string RunLog::to_jsonl() const {
  std::ostringstream out;
  write_jsonl(out);
  return out.str();
}

RunLog RunLog::read_jsonl(std::istream& in) {
  RunLog log;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto e = nlohmann::json::parse(line);
      if (!e.is_object() || !e.contains("event")) throw ParseError("missing event field");
      log.events_.push_back(std::move(e));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("event log line " + std::to_string(lineno) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError("event log line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return log;
}

}  // namespace tot
