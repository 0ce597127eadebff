#pragma once

// Problem instances on disk.
//
//   {"domain": "blocksworld", "initial": ["On(A,B)", ...], "goal": ["On(C,B)"],
//    "script": [{"prefix": [], "candidates": ["..."]}]}
//   {"domain": "game24", "numbers": [4, 9, 10, 13], "target": 24}
//
// "id" is optional and defaults to the file stem. "script" fixes the oracle's
// candidate lists for the listed prefixes.

#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tot/domain.hpp"
#include "tot/oracle_backend.hpp"

namespace tot {

struct Instance {
  std::string id;
  std::shared_ptr<const Domain> domain;
  OracleScript script;
  nlohmann::json source;
};

/// Throws ParseError on malformed input.
Instance parse_instance(const nlohmann::json& j, std::string fallback_id = "instance");
Instance load_instance(const std::filesystem::path& path);

/// Every *.json file in `dir`, ordered by file name.
std::vector<Instance> load_instance_dir(const std::filesystem::path& dir);

/// Random Blocksworld problem with `n_blocks` blocks whose goal differs from
/// the initial configuration. The goal is the full On-fact set of a second
/// random configuration.
nlohmann::json random_blocks_instance(int n_blocks, std::mt19937_64& rng);

nlohmann::json game24_instance(const std::vector<int>& numbers, int target = 24);

}  // namespace tot
