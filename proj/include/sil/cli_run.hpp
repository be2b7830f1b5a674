#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sil/estimators.hpp"
#include "sil/simgen.hpp"
#include "sil/solver.hpp"

namespace sil {

// Everything a command run needs; filled from a JSON config file with
// command-line overrides applied on top.
struct RunConfig {
  std::string command;  // fit, tune, simulate, experiment, sensitivity
  std::string data_dir;
  std::string out_dir = "sil_out";
  std::vector<std::string> methods;  // tune takes one; empty uses the
                                     // standard roster for experiments
  std::uint64_t seed = 1;
  int threads = 1;
  int replicates = 20;
  double edge_drop_fraction = 0.2;
  bool standardize = true;
  // unset keeps each preset's default; set forces adaptive weights on or
  // off (fit treats unset as off since it has no preset)
  std::optional<bool> adaptive;

  ScenarioConfig scenario;
  TuningGrid grid;
  FitOptions fit;

  // single-fit penalty settings
  std::string rho1 = "linear";
  std::string rho2 = "frobenius";
  double lambda = 0.1;
  double eta = 1.0;
  double alpha = 1.0;
  double lambda_ridge = 0.0;
};

// Methods reported in the benchmark tables, in table order.
std::vector<std::string> default_roster();

// Parses the JSON config; unknown keys and malformed values raise with the
// file and key named.
RunConfig load_run_config(const std::string& path);

// Executes one command, writing outputs under cfg.out_dir. Failures write
// error.json there and return 1. Timing appears only in run.log so every
// other output is byte-stable for a given config.
int run_command(const RunConfig& cfg);

}  // namespace sil
