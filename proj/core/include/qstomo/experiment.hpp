#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "qstomo/physics.hpp"
#include "qstomo/potential.hpp"
#include "qstomo/scatter.hpp"
#include "qstomo/sinogram.hpp"
#include "qstomo/tomo.hpp"

namespace qstomo {

struct ReconstructConfig {
  Filter filter = Filter::ram_lak;
  bool deconvolve = true;  // Wiener division by the packet smearing profile
  int n = 64;
  double extent = 10.0;
  double interior_fraction = 0.8;
};

// Single-line convergence study: one (theta, offset), several speeds, its own grid and
// time stepping. The horizon is always validated by doubling.
struct DecayStudy {
  std::vector<double> speeds;
  double theta = 0.0;
  double offset = 0.0;
  GridSpec grid{128, 32.0};
  double T = 3.0;
  double dt = 2e-3;
};

struct ExperimentConfig {
  ModelParams params;
  PotentialSpec potential;
  ScatterConfig scatter;
  SweepSpec sweep;
  ReconstructConfig reconstruct;
  std::optional<DecayStudy> decay;
  std::string output_dir = "out";
  std::uint64_t seed = 1;

  nlohmann::json normalized;  // canonical form, output_dir excluded
  std::string hash;           // FNV-1a of normalized
};

ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

struct CommandResult {
  int exit_code = 0;
  nlohmann::json report;
};

// Writes <out>/validate.json.
CommandResult run_validate(const ExperimentConfig& cfg, const std::string& out_dir);
PairingResult run_pairing(const ExperimentConfig& cfg, const Vec2& v, int j, const Vec2& offset);
nlohmann::json to_json(const PairingResult& r);
// <out>/sinogram.csv (+ .json, .errors.csv) and, with a decay study, <out>/decay.csv.
// Wall-clock times go to <out>/timing_sweep.json, the only file that differs between runs.
CommandResult run_sweep(const ExperimentConfig& cfg, int jobs, const std::string& out_dir);
// Fields recon_dV<j>_v<speed> and recon_oracle_dV<j>_v<speed>, V when both axes are present,
// and <out>/reconstruct.json with the interior L2 errors against grad V.
CommandResult run_reconstruct(const ExperimentConfig& cfg, const std::string& sinogram_path, int jobs,
                              const std::string& out_dir);
// <out>/report.json, <out>/error_vs_speed.csv, <out>/reconstruction_errors.csv.
CommandResult run_report(const ExperimentConfig& cfg, const std::string& out_dir,
                         const std::vector<std::string>& inputs);

}  // namespace qstomo
