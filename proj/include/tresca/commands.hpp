#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tresca/config.hpp"

namespace tresca {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3 };

struct StageStatus {
  std::string name;
  std::string status; ///< "ok", "failed", "skipped"
  std::string detail;
};

/// What a command did; written as JSON next to its outputs, also on failure.
struct RunManifest {
  std::string command;
  std::string config_path;
  std::string config_hash;
  std::vector<std::string> outputs;
  double wall_time = 0;
  int threads = 1;
  std::vector<StageStatus> stages;
  int exit_code = kExitOk;
  nlohmann::json results = nlohmann::json::object();

  nlohmann::json to_json() const;
};

/// Thread count from TRESCA_THREADS (default 1); throws InvalidArgument if malformed.
int configured_threads();

struct InvertFlags {
  std::optional<RecoveryMode> mode;
  std::optional<double> eps0;
  std::optional<std::uint64_t> seed;
};

/// Each command returns its exit code and writes `<output>/<command>_manifest.json`;
/// when the config cannot be read the manifest lands in the working directory.
int cmd_forward(const std::string& config_path, std::ostream& log);
int cmd_verify(const std::string& config_path, std::ostream& log);
int cmd_invert(const std::string& config_path, const InvertFlags& flags, std::ostream& log);
int cmd_sweep(const std::string& config_path, std::ostream& log);

} // namespace tresca
