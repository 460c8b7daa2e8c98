#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "entry/config.hpp"

namespace entrysim {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRunFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDependency = 3;

/// Command-line overrides; unset fields fall back to the config.
struct Options {
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::optional<unsigned> threads;
  std::string controller = "both";
  std::vector<std::filesystem::path> inputs;  ///< compare: the two metric CSVs
};

/// Returns the process exit status. Throws ConfigError / DependencyError for bad
/// inputs so the caller can map them to their own exit codes.
int run_subcommand(const std::string& name, const entry::ScenarioConfig& config, const Options& options);

int make_reference(const entry::ScenarioConfig& config, const Options& options);
int analyze_zero_dynamics(const entry::ScenarioConfig& config, const Options& options);
int run_nominal(const entry::ScenarioConfig& config, const Options& options);
int run_mc(const entry::ScenarioConfig& config, const Options& options);
int compare(const Options& options);

/// Trajectory resampled on the reference velocity grid, so every controller's
/// file shares the V and reference columns row for row.
void write_tracking_csv(const entry::Trajectory& trajectory, const entry::ReferenceTrajectory& reference,
                        const entry::EnvironmentConstants& env, double stride_mps, std::ostream& out);

}  // namespace entrysim
