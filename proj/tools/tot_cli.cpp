// tot: run, benchmark and replay thought-tree searches.
//
// Exit status: 0 success, 2 usage error, 3 data error (instance/log parse),
// 4 configuration error, 5 run aborted by a backend failure, 6 replay mismatch.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "tot/config.hpp"
#include "tot/errors.hpp"
#include "tot/runner.hpp"

namespace {

using nlohmann::json;

constexpr int kUsage = 2;
constexpr int kData = 3;
constexpr int kConfig = 4;
constexpr int kAborted = 5;
constexpr int kMismatch = 6;

struct CommonFlags {
  std::string preset;
  std::string components;
  std::string backend = "oracle";
  double noise = 0.0;
  double error_rate = 0.0;
  std::string endpoint;
  std::string model;
  std::uint64_t seed = 0;
  std::string out = "out";
  bool transcript = false;
  bool collect_all = false;
  std::optional<long> max_expansions;
  std::optional<long> max_generated;
  std::optional<long> max_tokens;
  std::optional<long> max_calls;
  std::optional<int> max_depth;
  std::optional<int> iterations;
  std::optional<int> beam_width;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  auto* preset = cmd->add_option("--preset", f.preset, "Named component preset (see `tot presets`)");
  auto* comps = cmd->add_option("--components", f.components, "Component configuration JSON file");
  preset->excludes(comps);
  cmd->add_option("--backend", f.backend, "oracle | mock | http")
      ->check(CLI::IsMember({"oracle", "mock", "http"}));
  cmd->add_option("--noise", f.noise, "Mock: probability of a distractor thought")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--error-rate", f.error_rate, "Mock: probability of a random evaluation")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--endpoint", f.endpoint, "HTTP: chat-completions URL (default $TOT_ENDPOINT)");
  cmd->add_option("--model", f.model, "HTTP: model name (default $TOT_MODEL)");
  cmd->add_option("--seed", f.seed, "Seed for stochastic backends");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_flag("--transcript", f.transcript, "Record backend exchanges to transcript.jsonl");
  cmd->add_flag("--collect-all", f.collect_all, "Keep searching after the first goal");
  cmd->add_option("--max-expansions", f.max_expansions, "Budget: node expansions");
  cmd->add_option("--max-thoughts", f.max_generated, "Budget: generated thoughts");
  cmd->add_option("--max-tokens", f.max_tokens, "Budget: completion tokens");
  cmd->add_option("--max-calls", f.max_calls, "Budget: backend calls");
  cmd->add_option("--max-depth", f.max_depth, "Budget: maximum depth");
  cmd->add_option("--iterations", f.iterations, "MCTS iterations");
  cmd->add_option("--beam-width", f.beam_width, "Beam width k");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw tot::ConfigError("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw tot::ConfigError(path + ": " + e.what());
  }
}

tot::RunOptions options_from(const CommonFlags& f) {
  tot::RunOptions o;
  if (!f.preset.empty()) {
    o.preset = f.preset;
    o.components = tot::load_preset(f.preset).config;
  } else if (!f.components.empty()) {
    o.components = tot::component_config_from_json(read_json_file(f.components));
  } else {
    throw tot::ConfigError("give --preset or --components");
  }
  auto& s = o.components.strategy;
  if (f.max_expansions) s.budget.max_expansions = *f.max_expansions;
  if (f.max_generated) s.budget.max_generated_thoughts = *f.max_generated;
  if (f.max_tokens) s.budget.max_tokens = *f.max_tokens;
  if (f.max_calls) s.budget.max_backend_calls = *f.max_calls;
  if (f.max_depth) s.budget.max_depth = *f.max_depth;
  if (f.collect_all) s.collect_all = true;
  if (f.iterations) {
    auto* m = std::get_if<tot::Mcts>(&s.strategy);
    if (!m) throw tot::ConfigError("--iterations needs the mcts strategy");
    m->iterations = *f.iterations;
  }
  if (f.beam_width) {
    auto* b = std::get_if<tot::Beam>(&s.strategy);
    if (!b) throw tot::ConfigError("--beam-width needs the beam strategy");
    b->width = *f.beam_width;
    s.pruning = tot::BeamPrune{*f.beam_width};
  }
  o.components.validate();

  o.backend.kind = f.backend == "mock"   ? tot::BackendKind::mock
                   : f.backend == "http" ? tot::BackendKind::http
                                         : tot::BackendKind::oracle;
  o.backend.noise = f.noise;
  o.backend.error_rate = f.error_rate;
  o.backend.endpoint = f.endpoint;
  o.backend.model = f.model;
  o.seed = f.seed;
  o.record_transcript = f.transcript || o.backend.kind == tot::BackendKind::http;
  return o;
}

int report_run(const tot::RunRecord& rec, const std::string& dir) {
  const auto& r = rec.result;
  std::cout << rec.instance_id << ": " << tot::to_string(r.outcome) << ", " << r.stats.expansions
            << " expansions, " << r.stats.tokens << " tokens, plan length " << r.plan.size() << " -> " << dir
            << "\n";
  if (r.error) std::cerr << "error: " << *r.error << "\n";
  return r.outcome == tot::Outcome::aborted ? kAborted : 0;
}

int cmd_run(const std::string& instance_path, const CommonFlags& f) {
  const auto inst = tot::load_instance(instance_path);
  const auto options = options_from(f);
  const auto rec = tot::run_instance(inst, options);
  tot::write_run(f.out, inst, rec, options);
  return report_run(rec, f.out);
}

int cmd_run_config(const std::string& config_path, const CommonFlags& f) {
  const std::filesystem::path path(config_path);
  auto rc = tot::run_config_from_json(read_json_file(config_path), path.parent_path());
  if (f.out != "out") rc.output = f.out;
  const auto inst = tot::load_instance(rc.instance);
  const auto rec = tot::run_instance(inst, rc.options);
  tot::write_run(rc.output, inst, rec, rc.options);
  return report_run(rec, rc.output.string());
}

int cmd_bench(const std::string& dir, const CommonFlags& f) {
  const auto instances = tot::load_instance_dir(dir);
  if (instances.empty()) throw tot::ParseError("no *.json instances in " + dir);
  const auto options = options_from(f);
  const auto m = tot::run_bench(instances, options, f.out);
  std::cout << instances.size() << " instances, success rate " << m.success_rate << ", " << m.expansions
            << " expansions, " << m.tokens << " tokens -> " << f.out << "\n";
  return 0;
}

int cmd_presets(bool as_json) {
  json all = json::array();
  for (const auto& p : tot::preset_registry()) {
    if (as_json) {
      all.push_back({{"name", p.name},
                     {"description", p.description},
                     {"manifest", p.manifest},
                     {"components", tot::to_json(p.config)}});
      continue;
    }
    std::cout << p.name << "\n  " << p.description << "\n  ";
    for (const char* key : {"proposal", "pruning", "strategy", "cost", "heuristic", "goalTest"}) {
      std::cout << key << "=" << p.manifest.at(key) << " ";
    }
    std::cout << "\n";
  }
  if (as_json) std::cout << all.dump(2) << "\n";
  return 0;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw tot::ParseError("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int cmd_replay(const std::string& run_dir, std::string out) {
  const std::filesystem::path dir(run_dir);
  const json cfg = read_json_file((dir / "config.json").string());
  const auto transcript = dir / "transcript.jsonl";
  if (!std::filesystem::exists(transcript)) throw tot::ParseError("no transcript.jsonl in " + run_dir);

  tot::RunOptions o;
  o.components = tot::component_config_from_json(cfg.at("components"));
  if (cfg.contains("preset")) o.preset = cfg["preset"].get<std::string>();
  o.seed = cfg.value("seed", std::uint64_t{0});
  o.backend.kind = tot::BackendKind::replay;
  o.backend.transcript = transcript;
  const auto inst = tot::parse_instance(cfg.at("instanceData"), cfg.value("instanceId", std::string("instance")));

  const auto rec = tot::run_instance(inst, o);
  if (out.empty()) out = (dir / "replay").string();
  tot::write_run(out, inst, rec, o);

  const std::string before = slurp(dir / "events.jsonl");
  const std::string after = rec.result.log.to_jsonl();
  if (before == after) {
    std::cout << "replay identical: " << rec.result.log.size() << " events -> " << out << "\n";
    return 0;
  }
  std::istringstream a(before), b(after);
  std::string la, lb;
  int line = 1;
  while (std::getline(a, la) && std::getline(b, lb) && la == lb) ++line;
  std::cerr << "replay differs from the recorded log at line " << line << "\n";
  return kMismatch;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thought-tree search runner"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  std::string instance, config;
  auto* run = app.add_subcommand("run", "Search one instance");
  auto* inst_opt = run->add_option("--instance", instance, "Instance JSON file");
  auto* cfg_opt = run->add_option("--config", config, "Run configuration JSON file");
  inst_opt->excludes(cfg_opt);
  add_common(run, run_flags);

  CommonFlags bench_flags;
  std::string instance_dir;
  auto* bench = app.add_subcommand("bench", "Search every instance in a directory");
  bench->add_option("--instances", instance_dir, "Directory of instance JSON files")->required();
  add_common(bench, bench_flags);

  bool as_json = false;
  auto* presets = app.add_subcommand("presets", "List component presets");
  presets->add_flag("--json", as_json, "Print full configurations as JSON");

  std::string run_dir, replay_out;
  auto* replay = app.add_subcommand("replay", "Re-execute a recorded run from its transcript");
  replay->add_option("run_dir", run_dir, "Directory written by `tot run --transcript`")->required();
  replay->add_option("--out", replay_out, "Output directory (default <run_dir>/replay)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (run->parsed()) {
      if (!config.empty()) return cmd_run_config(config, run_flags);
      if (instance.empty()) {
        std::cerr << "run: give --instance or --config\n";
        return kUsage;
      }
      return cmd_run(instance, run_flags);
    }
    if (bench->parsed()) return cmd_bench(instance_dir, bench_flags);
    if (presets->parsed()) return cmd_presets(as_json);
    if (replay->parsed()) return cmd_replay(run_dir, replay_out);
  } catch (const tot::ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const tot::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfig;
  } catch (const tot::BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kAborted;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kUsage;
}
