#include "tot/instance.hpp"

#include <algorithm>
#include <fstream>

#include "tot/blocksworld.hpp"
#include "tot/errors.hpp"
#include "tot/game24.hpp"

namespace tot {

using nlohmann::json;

namespace {

std::vector<std::string> string_list(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_array()) throw ParseError(std::string("'") + field + "' must be an array");
  std::vector<std::string> out;
  for (const json& x : j[field]) {
    if (!x.is_string()) throw ParseError(std::string("'") + field + "' must hold strings");
    out.push_back(x.get<std::string>());
  }
  return out;
}

game24::Rational number_from_json(const json& x) {
  if (x.is_number_integer()) return game24::Rational(x.get<std::int64_t>());
  if (x.is_string()) return game24::parse_number(x.get<std::string>());
  throw ParseError("game24 numbers must be integers or fraction strings");
}

}  // namespace

Instance parse_instance(const json& j, std::string fallback_id) {
  if (!j.is_object()) throw ParseError("instance must be a JSON object");
  Instance inst;
  inst.source = j;
  inst.id = j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>() : std::move(fallback_id);
  if (!j.contains("domain") || !j["domain"].is_string()) throw ParseError("instance needs a 'domain' string");
  const auto domain = j["domain"].get<std::string>();
  try {
    if (domain == "blocksworld") {
      auto initial = blocks::BlocksConfig::from_facts(string_list(j, "initial"));
      std::set<std::string> goal;
      for (const auto& fact : string_list(j, "goal")) goal.insert(blocks::canonical_fact(fact));
      inst.domain = std::make_shared<blocks::BlocksworldDomain>(std::move(initial), std::move(goal));
    } else if (domain == "game24") {
      if (!j.contains("numbers") || !j["numbers"].is_array()) throw ParseError("'numbers' must be an array");
      std::vector<game24::Rational> numbers;
      for (const json& x : j["numbers"]) numbers.push_back(number_from_json(x));
      const auto target = j.contains("target") ? number_from_json(j["target"]) : game24::Rational(24);
      inst.domain = std::make_shared<game24::Game24Domain>(std::move(numbers), target);
    } else {
      throw ParseError("unknown domain '" + domain + "' (blocksworld, game24)");
    }
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what());
  } catch (const InvalidStateError& e) {
    throw ParseError(e.what());
  }
  if (j.contains("script")) {
    if (!j["script"].is_array()) throw ParseError("'script' must be an array");
    for (const json& entry : j["script"]) {
      if (!entry.is_object()) throw ParseError("script entries must be objects");
      inst.script.add(string_list(entry, "prefix"), string_list(entry, "candidates"));
    }
  }
  return inst;
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read instance file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  try {
    return parse_instance(j, path.stem().string());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::vector<Instance> load_instance_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ParseError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Instance> out;
  for (const auto& f : files) out.push_back(load_instance(f));
  return out;
}

json random_blocks_instance(int n_blocks, std::mt19937_64& rng) {
  const auto initial = blocks::random_config(n_blocks, rng);
  auto goal = blocks::random_config(n_blocks, rng);
  while (goal == initial) goal = blocks::random_config(n_blocks, rng);
  json goal_facts = json::array();
  for (const auto& [block, support] : goal.supports()) goal_facts.push_back(blocks::on_fact(block, support));
  const auto initial_facts = initial.facts();
  return {{"domain", "blocksworld"},
          {"initial", std::vector<std::string>(initial_facts.begin(), initial_facts.end())},
          {"goal", goal_facts}};
}

json game24_instance(const std::vector<int>& numbers, int target) {
  return {{"domain", "game24"}, {"numbers", numbers}, {"target", target}};
}

}  // namespace tot
