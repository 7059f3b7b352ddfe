#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tresca/recovery.hpp"
#include "tresca/setup.hpp"

namespace tresca {

/// Bad config file; `line` is 1-based, 0 when no line applies.
class ConfigError : public InvalidArgument {
public:
  ConfigError(const std::string& source, std::size_t line, const std::string& what)
      : InvalidArgument(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Everything a run reads from its config file.
struct RunConfig {
  std::string source;  ///< file name used in messages
  std::string hash;    ///< 16 hex digits over the file bytes
  std::string output = "out";

  RuptureSetup setup;
  std::string friction_text;  ///< expression for the friction coefficient
  std::string normal_text;    ///< expression for F_n

  double eps0 = 0;
  std::uint64_t seed = 1;

  RecoveryMode mode = RecoveryMode::FullInverse;
  RecoveryOptions recovery;

  std::vector<double> sweep_levels{1e-2, 1e1, 1e2, 1e3};
  std::vector<std::uint64_t> sweep_seeds{1, 2, 3, 4, 5};
};

/// Sections: scenario, material, fault, friction, observation, inversion,
/// sweep. Unknown sections and keys are errors.
RunConfig parse_config(std::string_view text, const std::string& source = "config");
RunConfig load_config(const std::string& path);

/// 64-bit FNV-1a of the bytes, as 16 lower-case hex digits.
std::string content_hash(std::string_view bytes);

} // namespace tresca
