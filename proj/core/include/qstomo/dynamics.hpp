#pragma once

#include <string>
#include <vector>

#include "qstomo/field.hpp"
#include "qstomo/physics.hpp"
#include "qstomo/potential.hpp"

namespace qstomo {

// comoving: frame (q, p, S) follows the RK4 classical flow, scale stays 1, the envelope
// carries -k y^2/2 in the kicks.
// lens: the whole frame (q, p, S, scale, chirp) follows the exact quadratic flow, so the
// envelope only sees p^2/(2 scale^2) + V(q + scale y).
enum class FrameMode { comoving, lens };

struct EvolveConfig {
  double dt = 1e-3;
  std::vector<double> t_breakpoints{-1.0, 1.0};
  int strang_order = 2;
  double tolerance = 1e-6;
  FrameMode mode = FrameMode::comoving;
  // Kicks with dt * max|V u| below this are skipped (0 disables).
  double skip_tolerance = 0.0;
  // lens mode: V is sampled smoothed over kappa * h * (scale - 1) once the frame has spread,
  // the part of V narrower than a grid cell in envelope units (0 disables).
  double potential_smoothing = 0.0;
  double band_tolerance = 1e-8;
  int band_check_every = 100;
  int dump_every = 0;
  std::string dump_path;
};

void validate(const EvolveConfig& cfg);

WaveFunction evolve(const WaveFunction& psi, double t0, double t1, const PotentialSpec& potential,
                    const ModelParams& params, const EvolveConfig& cfg);

struct ConvergenceReport {
  double err_dt = 0.0;       // ||psi_dt - psi_dt/2||
  double err_dt_half = 0.0;  // ||psi_dt/2 - psi_dt/4||
  double order_estimate = 0.0;
};

ConvergenceReport convergence_probe(const WaveFunction& psi, double t0, double t1, const PotentialSpec& potential,
                                    const ModelParams& params, const EvolveConfig& cfg);

}  // namespace qstomo
