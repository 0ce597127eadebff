#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "oracles/blocks_bfs.hpp"
#include "oracles/ece.hpp"
#include "support.hpp"
#include "tot/config.hpp"
#include "tot/errors.hpp"
#include "tot/instance.hpp"
#include "tot/metrics.hpp"
#include "tot/runner.hpp"

using namespace tot;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("tot-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Instance case_study_instance() { return load_instance(fs::path(TOT_SOURCE_DIR) / "instances/blocksworld-case-study.json"); }

}  // namespace

TEST_CASE("bundled instances load") {
  const auto cs = case_study_instance();
  CHECK(cs.id == "blocksworld-case-study");
  CHECK(cs.domain->name() == "blocksworld");
  CHECK_FALSE(cs.script.empty());

  const auto all = load_instance_dir(fs::path(TOT_SOURCE_DIR) / "instances");
  REQUIRE(all.size() == 2);
  CHECK(all[1].id == "game24-4-9-10-13");
  CHECK(all[1].domain->name() == "game24");
}

TEST_CASE("instance parse errors") {
  CHECK_THROWS_AS(parse_instance(json::array()), ParseError);
  CHECK_THROWS_AS(parse_instance(json{{"domain", "chess"}}), ParseError);
  CHECK_THROWS_AS(parse_instance(json{{"domain", "blocksworld"}, {"initial", {"On(A,B)"}}, {"goal", json::array()}}),
                  ParseError);
  CHECK_THROWS_AS(parse_instance(json{{"domain", "game24"}, {"numbers", {1, "x"}}}), ParseError);
  CHECK_THROWS_AS(load_instance("/nonexistent/instance.json"), ParseError);
  const auto g = parse_instance(json{{"domain", "game24"}, {"numbers", {"1/2", 3}}, {"target", 10}}, "frac");
  CHECK(g.id == "frac");
  CHECK(g.domain->prompt().find("1/2 3") != std::string::npos);
}

TEST_CASE("random blocks instances have differing goals") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    const auto j = random_blocks_instance(3 + i % 3, rng);
    const auto inst = parse_instance(j);
    const auto& d = dynamic_cast<const blocks::BlocksworldDomain&>(*inst.domain);
    const auto dist = oracle::bfs_plan_length(oracle::world_from_supports(d.initial().supports()), d.goal());
    REQUIRE(dist);
    CHECK(*dist >= 1);
  }
}

TEST_CASE("preset manifests match their configurations") {
  for (const auto& p : preset_registry()) {
    CAPTURE(p.name);
    CHECK_NOTHROW(p.config.validate());
    const auto tags = component_tags(p.config);
    for (const auto& [key, expected] : p.manifest) CHECK(tags.at(key) == expected);
  }
  for (const char* name :
       {"yao-game24-beam", "yao-crosswords-dfs", "pendurkar-lts", "hao-blocksworld-mcts", "zhang-bfs"}) {
    CHECK_NOTHROW(load_preset(name));
  }
  const auto& beam = load_preset("yao-game24-beam").config;
  CHECK(std::holds_alternative<UniformCost>(beam.cost));
  CHECK(std::get<Beam>(beam.strategy.strategy).width == std::get<BeamPrune>(*beam.strategy.pruning).k);
  CHECK(load_preset("pendurkar-lts").config.combiner == Combiner::ratio);
  try {
    load_preset("nope");
    FAIL("expected a configuration error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("yao-game24-beam") != std::string::npos);
  }
}

TEST_CASE("component configuration json round trip") {
  for (const auto& p : preset_registry()) {
    const json j = to_json(p.config);
    CHECK(to_json(component_config_from_json(j)) == j);
  }
  const json custom = {{"proposal", {{"strategy", "diversity"}, {"branch", 4}, {"ngramN", 3}}},
                       {"constraints", {"C1", {{"kind", "C3"}, {"maxTokens", 40}}}},
                       {"heuristic", {{"kind", "zero"}, {"inversion", "identity"}}},
                       {"strategy", {{"kind", "greedyDfs"}, {"threshold", "inf"}}},
                       {"pruning", {{"kind", "threshold"}, {"threshold", 5}}},
                       {"budget", {{"maxExpansions", 10}}},
                       {"goalTest", "T1"}};
  const auto c = component_config_from_json(custom);
  CHECK(c.proposal.strategy == ProposalStrategy::diversity);
  REQUIRE(c.proposal.diversity);
  CHECK(c.proposal.diversity->ngram_n == 3);
  CHECK(c.constraints.size() == 2);
  CHECK(c.constraints[1].max_tokens == 40);
  CHECK(std::isinf(std::get<GreedyDfs>(c.strategy.strategy).threshold));
  CHECK(c.strategy.budget.max_expansions == 10);
  CHECK(component_tags(c).at("proposal") == "S2+C1+C3");
  CHECK(component_tags(c).at("pruning") == "P3");

  CHECK_THROWS_AS(component_config_from_json(json{{"strategy", {{"kind", "astar"}}}}), ConfigError);
  CHECK_THROWS_AS(component_config_from_json(json{{"goalTest", "T9"}}), ConfigError);
  CHECK_THROWS_AS(component_config_from_json(json{{"proposal", {{"branch", "many"}}}}), ConfigError);
  CHECK_THROWS_AS(component_config_from_json(json{{"heuristic", {{"kind", "value"}, {"inversion", "identity"}}}}),
                  ConfigError);
}

TEST_CASE("run configuration requires exactly one of preset and components") {
  const json both = {{"instance", "x.json"}, {"preset", "zhang-bfs"}, {"components", json::object()}};
  CHECK_THROWS_AS(run_config_from_json(both), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(json{{"instance", "x.json"}}), ConfigError);
  const auto rc = run_config_from_json(
      json{{"instance", "x.json"}, {"preset", "zhang-bfs"}, {"backend", {{"kind", "mock"}, {"errorRate", 0.25}}},
           {"seed", 9}},
      "/base");
  CHECK(rc.instance == fs::path("/base/x.json"));
  CHECK(rc.options.backend.kind == BackendKind::mock);
  CHECK(rc.options.backend.error_rate == 0.25);
  CHECK(rc.options.seed == 9);
  CHECK_THROWS_AS(BackendSpec::from_json("carrier-pigeon"), ConfigError);
}

TEST_CASE("calibration error against the hand formula") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::pair<double, bool>> xs;
    for (int i = 0; i < 200; ++i) xs.emplace_back(u(rng), u(rng) < 0.5);
    xs.emplace_back(1.0, true);
    xs.emplace_back(0.0, false);
    CHECK(expected_calibration_error(xs) == doctest::Approx(oracle::ece10(xs)).epsilon(1e-12));
  }
  CHECK(expected_calibration_error({{0.7, true}, {0.3, false}}) == doctest::Approx(0.3));
  CHECK_THROWS_AS(expected_calibration_error({}), InvalidArgument);
  CHECK_THROWS_AS(expected_calibration_error({{1.5, true}}), InvalidArgument);
}

TEST_CASE("distinct unigram ratio") {
  CHECK(distinct_unigram_ratio({"a b", "a c"}) == 0.75);
  CHECK_FALSE(distinct_unigram_ratio({}));
}

namespace {

/// Best-first on the instance with an external estimate of hSuccess.
RunLog scored_run(const Domain& d, std::function<double(const State&)> estimate) {
  OracleBackend oracle(d);
  SearchComponents c;
  c.backend = &oracle;
  c.proposal.strategy = ProposalStrategy::enumerated;
  c.proposal.branch = 32;
  c.heuristic.kind = External{std::move(estimate), ScaleKind::success, "test"};
  c.goal_test = GoalTestKind::llm;
  StrategyConfig cfg;
  cfg.budget.max_depth = 3;
  return run_search(problem_from_domain(d), cfg, c).log;
}

bool reachable(const Domain& d, const State& s) {
  try {
    return d.validate(s) && d.distance_to_goal(s).has_value();
  } catch (const InvalidStateError&) {
    return false;
  }
}

}  // namespace

TEST_CASE("metrics from a perfect evaluator") {
  const auto d = fixture::game24({4, 9, 10, 13});
  const RunLog log = scored_run(*d, [&](const State& s) { return reachable(*d, s) ? 1.0 : 0.0; });
  const auto m = compute_metrics({&log}, {domain_reachability(*d)});
  CHECK(m.success_rate == 1.0);
  REQUIRE(m.discriminative_accuracy);
  CHECK(*m.discriminative_accuracy == 1.0);
  REQUIRE(m.calibration_error);
  CHECK(*m.calibration_error <= 0.1);
  CHECK(m.distinct_valid_paths == 1);
  REQUIRE(m.candidate_diversity);
  CHECK(*m.candidate_diversity > 0.0);
  CHECK(*m.candidate_diversity <= 1.0);
}

TEST_CASE("metrics from a gapped evaluator") {
  const auto d = fixture::game24({4, 9, 10, 13});
  const RunLog log = scored_run(*d, [&](const State& s) { return reachable(*d, s) ? 0.7 : 0.3; });
  const auto m = compute_metrics({&log}, {domain_reachability(*d)});
  REQUIRE(m.calibration_error);
  CHECK(*m.calibration_error == doctest::Approx(0.3));

  // hand oracle over the same (hSuccess, label) pairs read back from the log
  std::vector<std::pair<double, bool>> pairs;
  std::map<NodeId, std::vector<std::string>> paths{{0, {}}};
  for (const auto& e : log.events()) {
    if (e["event"] == event::kNodeCreated && e.contains("parent")) {
      auto p = paths.at(e["parent"].get<NodeId>());
      p.push_back(e["thought"].get<std::string>());
      paths[e["node"].get<NodeId>()] = p;
    }
    if (e["event"] == event::kNodeScored) {
      const auto& p = paths.at(e["node"].get<NodeId>());
      pairs.emplace_back(e["hSuccess"].get<double>(), reachable(*d, fixture::with(*d, p)));
    }
  }
  CHECK(*m.calibration_error == doctest::Approx(oracle::ece10(pairs)));
}

TEST_CASE("metrics absent without labels") {
  const auto d = fixture::game24({1, 1, 1, 1});
  const RunLog log = scored_run(*d, [](const State&) { return 0.5; });
  const auto m = compute_metrics({&log}, {});
  CHECK(m.success_rate == 0.0);
  CHECK_FALSE(m.calibration_error);
  CHECK_FALSE(m.discriminative_accuracy);
  CHECK(m.to_json()["calibrationError"].is_null());
}

TEST_CASE("run log jsonl round trip") {
  const auto inst = case_study_instance();
  RunOptions o;
  o.components = load_preset("case-study-bfs").config;
  const auto rec = run_instance(inst, o);
  std::istringstream in(rec.result.log.to_jsonl());
  const RunLog back = RunLog::read_jsonl(in);
  CHECK(back.to_jsonl() == rec.result.log.to_jsonl());
  std::istringstream bad("{\"event\": 1}\nnot json\n");
  CHECK_THROWS_AS(RunLog::read_jsonl(bad), ParseError);
}

TEST_CASE("run artefacts") {
  const auto inst = load_instance(fs::path(TOT_SOURCE_DIR) / "instances/game24-4-9-10-13.json");
  RunOptions o;
  o.components = load_preset("yao-game24-beam").config;
  o.preset = "yao-game24-beam";
  o.seed = 7;
  o.record_transcript = true;
  const auto rec = run_instance(inst, o);
  CHECK(rec.result.outcome != Outcome::aborted);
  const auto dir = fresh_dir("run");
  write_run(dir, inst, rec, o);
  for (const char* f : {"events.jsonl", "summary.json", "metrics.csv", "config.json", "transcript.jsonl"}) {
    CHECK(fs::exists(dir / f));
  }
  const json summary = json::parse(slurp(dir / "summary.json"));
  CHECK(summary["outcome"] == std::string(to_string(rec.result.outcome)));
  CHECK(summary["components"]["strategy"] == "Beam");
  CHECK(summary["stats"]["tokens"] == rec.result.stats.tokens);
  CHECK(summary["metrics"]["tokens"] == rec.result.stats.tokens);
  CHECK(slurp(dir / "events.jsonl") == rec.result.log.to_jsonl());

  // replay from the persisted artefacts
  const json cfg = json::parse(slurp(dir / "config.json"));
  RunOptions r;
  r.components = component_config_from_json(cfg["components"]);
  r.backend.kind = BackendKind::replay;
  r.backend.transcript = dir / "transcript.jsonl";
  const auto again = run_instance(parse_instance(cfg["instanceData"], cfg["instanceId"]), r);
  CHECK(again.result.log.to_jsonl() == rec.result.log.to_jsonl());
}

TEST_CASE("bench writes one row per instance and an aggregate") {
  std::mt19937_64 rng(20);
  std::vector<Instance> instances;
  for (int i = 0; i < 20; ++i) {
    instances.push_back(parse_instance(random_blocks_instance(3, rng), "bw-" + std::to_string(i)));
  }
  RunOptions o;
  o.components = load_preset("hao-blocksworld-mcts").config;
  o.backend.kind = BackendKind::mock;
  o.backend.error_rate = 0.1;
  const auto dir = fresh_dir("bench");
  const auto m = run_bench(instances, o, dir);
  CHECK(m.runs == 20);
  std::istringstream table(slurp(dir / "metrics.csv"));
  std::vector<std::string> lines;
  for (std::string line; std::getline(table, line);) lines.push_back(line);
  REQUIRE(lines.size() == 22);
  CHECK(lines.back().rfind("ALL,", 0) == 0);
  const json summary = json::parse(slurp(dir / "summary.json"));
  CHECK(summary["runs"].size() == 20);
  CHECK(summary["aggregate"]["successRate"] == m.success_rate);
  long tokens = 0;
  for (const auto& run : summary["runs"]) tokens += run["stats"]["tokens"].get<long>();
  CHECK(tokens == m.tokens);
  for (int i = 0; i < 20; ++i) CHECK(fs::exists(dir / ("bw-" + std::to_string(i)) / "events.jsonl"));
}

namespace {

/// Chat server answering like the exhaustive oracle. The prompt is the first
/// line of the request, the instruction the last; lines between are thoughts.
class OracleChatServer {
 public:
  explicit OracleChatServer(const Domain& domain) : domain_(domain), oracle_(domain) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const json body = json::parse(req.body);
      res.set_content(answer(body).dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~OracleChatServer() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }

 private:
  json answer(const json& body) {
    std::lock_guard lock(mutex_);
    std::istringstream in(body["messages"][0]["content"].get<std::string>());
    std::vector<std::string> lines;
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    const std::string instruction = lines.back();
    std::vector<std::string> thoughts(lines.begin() + 1, lines.end() - 1);
    const State s = fixture::with(domain_, thoughts);
    std::string text;
    if (instruction == kEvaluateInstruction) {
      text = oracle_.evaluate(s, {}).text;
    } else if (instruction == kGoalInstruction) {
      text = oracle_.judge_goal(s, {}).text;
    } else if (instruction == kValidInstruction) {
      text = oracle_.judge_valid(s, {}).text;
    } else {
      const auto cands = oracle_.candidates(s);
      int& next = draws_[lines];
      text = cands.empty() ? "" : cands[static_cast<std::size_t>(next++) % cands.size()].first;
    }
    return {{"choices", {{{"message", {{"role", "assistant"}, {"content", text}}}}}},
            {"usage", {{"prompt_tokens", count_tokens(body["messages"][0]["content"].get<std::string>())},
                       {"completion_tokens", count_tokens(text)}}}};
  }

  const Domain& domain_;
  OracleBackend oracle_;
  std::mutex mutex_;
  std::map<std::vector<std::string>, int> draws_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_CASE("persisted http transcripts replay to the identical log") {
  const auto inst = case_study_instance();
  OracleChatServer server(*inst.domain);
  RunOptions o;
  o.components = load_preset("case-study-bfs").config;
  o.backend.kind = BackendKind::http;
  o.backend.endpoint = server.endpoint();
  o.record_transcript = true;
  const auto rec = run_instance(inst, o);
  CHECK(rec.result.outcome == Outcome::solved);
  CHECK(rec.result.plan.size() == 3);
  const auto dir = fresh_dir("http");
  write_run(dir, inst, rec, o);

  RunOptions r = o;
  r.backend = BackendSpec{};
  r.backend.kind = BackendKind::replay;
  r.backend.transcript = dir / "transcript.jsonl";
  r.record_transcript = false;
  const auto again = run_instance(inst, r);
  CHECK(again.result.log.to_jsonl() == slurp(dir / "events.jsonl"));
  CHECK(again.result.stats.tokens == rec.result.stats.tokens);
}
