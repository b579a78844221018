#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "evolv/scenario.hpp"

namespace evolv::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitDegenerateStep = 3;
inline constexpr int kExitNumericError = 4;

struct Options {
  std::string scenario;  // file path or named example
  std::vector<double> nus;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  bool dump_scenario = false;
  double tol = 1e-10;
  bool anticausal = false;
  Index halvings = 4;
  std::string mode = "both";  // convergence: temporal | spatial | both
};

int cmd_solve(const Options& opts);
int cmd_certify(const Options& opts);
int cmd_verify(const std::string& suite, const Options& opts);
int cmd_convergence(const Options& opts);
int cmd_examples(const Options& opts, const std::string& name);

/// Manufactured-solution studies for the heat example. The temporal study
/// manufactures against the spatially discrete system (pure time error);
/// the spatial study uses the continuum source at a small fixed step.
ConvergenceReport heat_temporal_study(const HeatParams& params, Index halvings);
ConvergenceReport heat_spatial_study(const HeatParams& params, Index halvings);

/// Runs a command body and maps library errors onto the exit-code contract.
int run_guarded(const std::function<int()>& body);

}  // namespace evolv::cli
