#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "entry/mc_harness.hpp"

namespace entry {

/// The frozen acceptance scenario: tuned guidance gains, 5 Hz guidance and an
/// entry interface that captures the heat-rate boundary from above.
[[nodiscard]] Scenario pinned_scenario();

/// Everything a JSON config file can set. Default-constructed values are the pinned scenario.
struct ScenarioConfig {
  Scenario scenario = pinned_scenario();
  DispersionSpec dispersions{};
  std::size_t mc_runs = 500;
  std::uint64_t mc_seed = 1;
  unsigned mc_threads = 0;
  std::string output_dir = "out";

  /// Range checks of every module precondition; throws ConfigError naming the JSON path.
  void validate() const;
};

/// Missing keys keep their defaults; unknown keys, wrong types and out-of-range values
/// throw ConfigError with the offending path (e.g. "guidance.zeta").
[[nodiscard]] ScenarioConfig parse_config(std::string_view json_text);
[[nodiscard]] ScenarioConfig load_config(const std::filesystem::path& path);

/// Effective config as pretty-printed JSON; parse_config(dump_config(c)) reproduces c.
[[nodiscard]] std::string dump_config(const ScenarioConfig& config);

}  // namespace entry
