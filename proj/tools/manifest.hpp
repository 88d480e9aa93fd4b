#pragma once

#include <chrono>
#include <string>
#include <vector>

#include <json.hpp>

namespace ratedev::cli {

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

/// Reproducibility record written next to every command's outputs.
///
/// `args` is the canonical argument list (every resolved setting spelled out
/// as a flag), so replaying it does not depend on config files or defaults.
struct RunManifest {
  std::string command;
  std::vector<std::string> args;
  std::vector<std::string> original_args;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json seeds = nlohmann::json::object();
  nlohmann::json inputs = nlohmann::json::array();
  nlohmann::json summary = nlohmann::json::object();
  double duration_seconds = 0.0;

  void add_input(const std::string& path);
  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

}  // namespace ratedev::cli
