#pragma once

#include "domsplit/config.hpp"
#include "domsplit/report.hpp"
#include "domsplit/torus_map.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace domsplit {

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides the config seed
  int threads = 1;
  bool timing = false;  // adds wall time, which breaks byte-identical reruns
};

TorusMap build_map(const MapRecipe& recipe);

Report run_scan(const AnalysisConfig& cfg, const RunOptions& opt);
Report run_splitting(const AnalysisConfig& cfg, const RunOptions& opt);
Report run_conecheck(const AnalysisConfig& cfg, const RunOptions& opt);
Report run_perturb(const AnalysisConfig& cfg, const RunOptions& opt);
// Throws InvalidArgument for an unknown command.
Report run_command(const std::string& command, const AnalysisConfig& cfg, const RunOptions& opt);

}  // namespace domsplit
