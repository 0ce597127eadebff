#pragma once

// Runs configured searches on instances and persists their artefacts:
//   events.jsonl     one RunLog event per line
//   summary.json     outcome, plan, statistics, metrics, wall-clock time
//   metrics.csv      one row per instance (bench adds an aggregate row)
//   config.json      resolved configuration, enough to replay the run
//   transcript.jsonl backend exchanges (when recorded)

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tot/config.hpp"
#include "tot/instance.hpp"
#include "tot/metrics.hpp"
#include "tot/search.hpp"
#include "tot/transcript.hpp"

namespace tot {

enum class BackendKind { oracle, mock, http, replay };

std::string_view to_string(BackendKind kind);

struct BackendSpec {
  BackendKind kind = BackendKind::oracle;
  double noise = 0.0;
  double error_rate = 0.0;
  /// HTTP only; empty means TOT_ENDPOINT / TOT_MODEL.
  std::string endpoint;
  std::string model;
  /// Replay only.
  std::filesystem::path transcript;

  nlohmann::json to_json() const;
  static BackendSpec from_json(const nlohmann::json& j);
};

struct RunOptions {
  ComponentConfig components;
  std::optional<std::string> preset;
  BackendSpec backend;
  std::uint64_t seed = 0;
  bool record_transcript = false;
};

/// Run configuration file: {"instance": path, "preset": name | "components": {...},
/// "backend": {...}, "seed": n, "output": dir, "transcript": bool}.
struct RunConfig {
  std::filesystem::path instance;
  std::filesystem::path output = "out";
  RunOptions options;
};

/// Throws ConfigError when both or neither of preset/components are given.
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

struct RunRecord {
  std::string instance_id;
  SearchResult result;
  MetricsReport metrics;
  std::vector<TranscriptEntry> transcript;
  double wall_seconds = 0.0;
};

/// Backend failures end the run with outcome aborted; configuration problems throw.
RunRecord run_instance(const Instance& instance, const RunOptions& options);

nlohmann::json summary_json(const Instance& instance, const RunRecord& record, const RunOptions& options);
nlohmann::json replay_config_json(const Instance& instance, const RunOptions& options);

std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& label, const std::string& outcome, const SearchStats* stats,
                            const MetricsReport& metrics, double wall_seconds);

/// Writes the single-run artefacts into `dir` (created if needed).
void write_run(const std::filesystem::path& dir, const Instance& instance, const RunRecord& record,
               const RunOptions& options);

/// Runs every instance; per-instance logs go to dir/<id>/, the combined
/// summary and table to dir/. Returns the aggregate metrics.
MetricsReport run_bench(const std::vector<Instance>& instances, const RunOptions& options,
                        const std::filesystem::path& dir);

}  // namespace tot
