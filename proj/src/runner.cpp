#include "tot/runner.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "tot/errors.hpp"
#include "tot/http_backend.hpp"
#include "tot/oracle_backend.hpp"

namespace tot {

using nlohmann::json;

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::oracle: return "oracle";
    case BackendKind::mock: return "mock";
    case BackendKind::http: return "http";
    case BackendKind::replay: return "replay";
  }
  return "?";
}

json BackendSpec::to_json() const {
  json j = {{"kind", std::string(tot::to_string(kind))}};
  if (kind == BackendKind::mock) {
    j["noise"] = noise;
    j["errorRate"] = error_rate;
  }
  if (kind == BackendKind::http) {
    if (!endpoint.empty()) j["endpoint"] = endpoint;
    if (!model.empty()) j["model"] = model;
  }
  if (kind == BackendKind::replay) j["transcript"] = transcript.string();
  return j;
}

BackendSpec BackendSpec::from_json(const json& j) {
  BackendSpec spec;
  if (j.is_string()) return from_json(json{{"kind", j}});
  if (!j.is_object()) throw ConfigError("backend must be a string or an object");
  try {
    const auto kind = j.value("kind", std::string("oracle"));
    if (kind == "oracle") {
      spec.kind = BackendKind::oracle;
    } else if (kind == "mock") {
      spec.kind = BackendKind::mock;
    } else if (kind == "http") {
      spec.kind = BackendKind::http;
    } else if (kind == "replay") {
      spec.kind = BackendKind::replay;
    } else {
      throw ConfigError("unknown backend '" + kind + "' (oracle, mock, http, replay)");
    }
    spec.noise = j.value("noise", 0.0);
    spec.error_rate = j.value("errorRate", 0.0);
    spec.endpoint = j.value("endpoint", std::string());
    spec.model = j.value("model", std::string());
    spec.transcript = j.value("transcript", std::string());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad backend configuration: ") + e.what());
  }
  return spec;
}

RunConfig run_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("run configuration must be an object");
  const bool has_preset = j.contains("preset");
  const bool has_components = j.contains("components");
  if (has_preset == has_components) throw ConfigError("give exactly one of 'preset' and 'components'");
  RunConfig rc;
  try {
    if (!j.contains("instance")) throw ConfigError("run configuration needs 'instance'");
    rc.instance = j["instance"].get<std::string>();
    if (rc.instance.is_relative() && !base_dir.empty()) rc.instance = base_dir / rc.instance;
    if (j.contains("output")) rc.output = j["output"].get<std::string>();
    if (has_preset) {
      rc.options.preset = j["preset"].get<std::string>();
      rc.options.components = load_preset(*rc.options.preset).config;
    } else {
      rc.options.components = component_config_from_json(j["components"]);
    }
    if (j.contains("backend")) rc.options.backend = BackendSpec::from_json(j["backend"]);
    rc.options.seed = j.value("seed", std::uint64_t{0});
    rc.options.record_transcript = j.value("transcript", false);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad run configuration: ") + e.what());
  }
  return rc;
}

namespace {

std::unique_ptr<Backend> make_backend(const Instance& inst, const RunOptions& options) {
  const Domain& d = *inst.domain;
  const auto mode = evaluator_mode_for(options.components.heuristic);
  switch (options.backend.kind) {
    case BackendKind::oracle: return std::make_unique<OracleBackend>(d, inst.script, mode);
    case BackendKind::mock:
      return std::make_unique<MockBackend>(
          d, MockOptions{options.seed, options.backend.noise, options.backend.error_rate, mode}, inst.script);
    case BackendKind::http: {
      HttpOptions http;
      http.endpoint = options.backend.endpoint;
      if (const char* e = std::getenv("TOT_ENDPOINT"); http.endpoint.empty() && e) http.endpoint = e;
      if (const char* m = std::getenv("TOT_MODEL")) http.model = m;
      if (!options.backend.model.empty()) http.model = options.backend.model;
      if (const char* k = std::getenv("TOT_API_KEY")) http.api_key = k;
      if (http.endpoint.empty()) throw ConfigError("http backend needs an endpoint (config or TOT_ENDPOINT)");
      return std::make_unique<HttpBackend>(std::move(http));
    }
    case BackendKind::replay: {
      std::ifstream in(options.backend.transcript);
      if (!in) throw ConfigError("cannot read transcript " + options.backend.transcript.string());
      return std::make_unique<ReplayBackend>(ReplayBackend::from_jsonl(in));
    }
  }
  throw ConfigError("unknown backend");
}

std::string format_optional(const std::optional<double>& x) {
  if (!x) return "";
  std::ostringstream out;
  out << std::setprecision(6) << *x;
  return out.str();
}

json stats_json(const SearchStats& s) {
  return {{"expansions", s.expansions},
          {"generatedThoughts", s.generated_thoughts},
          {"prunedNodes", s.pruned_nodes},
          {"rejectedCandidates", s.rejected_candidates},
          {"backendCalls", s.backend_calls},
          {"tokens", s.tokens},
          {"promptTokens", s.prompt_tokens},
          {"iterations", s.iterations},
          {"failedIterations", s.failed_iterations},
          {"evaluationWarnings", s.evaluation_warnings}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace

RunRecord run_instance(const Instance& instance, const RunOptions& options) {
  const Domain& domain = *instance.domain;
  ComponentConfig c = options.components;
  if (c.proposal.instruction.empty()) c.proposal.instruction = domain.step_instruction();
  c.validate();

  auto backend = make_backend(instance, options);
  std::unique_ptr<RecordingBackend> recorder;
  Backend* active = backend.get();
  if (options.record_transcript) {
    recorder = std::make_unique<RecordingBackend>(*backend);
    active = recorder.get();
  }

  SearchComponents sc;
  sc.backend = active;
  sc.proposal = c.proposal;
  sc.constraints = build_constraints(c.constraints, domain);
  sc.cost = c.cost;
  sc.heuristic = build_heuristic(c.heuristic, domain);
  sc.combiner = c.combiner;
  sc.goal_test = c.goal_test;
  sc.validator = c.validator;
  sc.detect_duplicates = c.detect_duplicates;

  StrategyConfig strategy = c.strategy;
  strategy.seed = options.seed;

  RunRecord record;
  record.instance_id = instance.id;
  const auto start = std::chrono::steady_clock::now();
  record.result = run_search(problem_from_domain(domain), strategy, sc);
  record.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  record.metrics = compute_metrics({&record.result.log}, {domain_reachability(domain)});
  if (recorder) record.transcript = recorder->entries();
  return record;
}

json replay_config_json(const Instance& instance, const RunOptions& options) {
  json j = {{"instanceData", instance.source},
            {"instanceId", instance.id},
            {"components", to_json(options.components)},
            {"backend", options.backend.to_json()},
            {"seed", options.seed}};
  if (options.preset) j["preset"] = *options.preset;
  return j;
}

json summary_json(const Instance& instance, const RunRecord& record, const RunOptions& options) {
  const auto& r = record.result;
  json plan = json::array();
  for (const auto& z : r.plan) plan.push_back(z.text());
  json j = {{"instance", instance.id},
            {"domain", std::string(instance.domain->name())},
            {"preset", options.preset ? json(*options.preset) : json(nullptr)},
            {"components", component_tags(options.components)},
            {"backend", options.backend.to_json()},
            {"seed", options.seed},
            {"outcome", std::string(to_string(r.outcome))},
            {"error", r.error ? json(*r.error) : json(nullptr)},
            {"plan", plan},
            {"solutions", r.solutions},
            {"stats", stats_json(r.stats)},
            {"metrics", record.metrics.to_json()},
            {"wallSeconds", record.wall_seconds}};
  return j;
}

std::string metrics_csv_header() {
  return "instance,outcome,successRate,expansions,generatedThoughts,prunedNodes,backendCalls,tokens,promptTokens,"
         "distinctValidPaths,candidateDiversity,discriminativeAccuracy,calibrationError,wallSeconds\n";
}

std::string metrics_csv_row(const std::string& label, const std::string& outcome, const SearchStats* stats,
                            const MetricsReport& m, double wall_seconds) {
  std::ostringstream out;
  out << label << ',' << outcome << ',' << m.success_rate << ',' << m.expansions << ',' << m.generated_thoughts << ','
      << (stats ? std::to_string(stats->pruned_nodes) : "") << ','
      << (stats ? std::to_string(stats->backend_calls) : "") << ',' << m.tokens << ','
      << (stats ? std::to_string(stats->prompt_tokens) : "") << ',' << m.distinct_valid_paths << ','
      << format_optional(m.candidate_diversity) << ',' << format_optional(m.discriminative_accuracy) << ','
      << format_optional(m.calibration_error) << ',' << std::setprecision(6) << wall_seconds << '\n';
  return out.str();
}

void write_run(const std::filesystem::path& dir, const Instance& instance, const RunRecord& record,
               const RunOptions& options) {
  std::filesystem::create_directories(dir);
  write_text(dir / "events.jsonl", record.result.log.to_jsonl());
  write_text(dir / "summary.json", summary_json(instance, record, options).dump(2) + "\n");
  write_text(dir / "metrics.csv",
             metrics_csv_header() + metrics_csv_row(instance.id, std::string(to_string(record.result.outcome)),
                                                    &record.result.stats, record.metrics, record.wall_seconds));
  write_text(dir / "config.json", replay_config_json(instance, options).dump(2) + "\n");
  if (options.record_transcript) {
    std::ostringstream out;
    for (const auto& e : record.transcript) out << e.to_json().dump() << '\n';
    write_text(dir / "transcript.jsonl", out.str());
  }
}

MetricsReport run_bench(const std::vector<Instance>& instances, const RunOptions& options,
                        const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<RunRecord> records;
  json runs = json::array();
  std::string table = metrics_csv_header();
  double total_seconds = 0.0;
  for (const auto& inst : instances) {
    RunRecord rec = run_instance(inst, options);
    write_run(dir / inst.id, inst, rec, options);
    runs.push_back(summary_json(inst, rec, options));
    table += metrics_csv_row(inst.id, std::string(to_string(rec.result.outcome)), &rec.result.stats, rec.metrics,
                             rec.wall_seconds);
    total_seconds += rec.wall_seconds;
    records.push_back(std::move(rec));
  }
  std::vector<const RunLog*> logs;
  std::vector<ReachabilityOracle> oracles;
  for (std::size_t i = 0; i < records.size(); ++i) {
    logs.push_back(&records[i].result.log);
    oracles.push_back(domain_reachability(*instances[i].domain));
  }
  MetricsReport aggregate = compute_metrics(logs, oracles);
  table += metrics_csv_row("ALL", "", nullptr, aggregate, total_seconds);
  write_text(dir / "summary.json",
             json{{"runs", runs}, {"aggregate", aggregate.to_json()}, {"wallSeconds", total_seconds}}.dump(2) + "\n");
  write_text(dir / "metrics.csv", table);
  return aggregate;
}

}  // namespace tot
