#pragma once

#include <string>
#include <vector>

#include "qstomo/dynamics.hpp"
#include "qstomo/errors.hpp"
#include "qstomo/field.hpp"
#include "qstomo/physics.hpp"
#include "qstomo/potential.hpp"
#include "qstomo/quadprop.hpp"
#include "qstomo/sinogram.hpp"

namespace qstomo {

enum class GrafMode { off, on };
// matched: the I_v phase is integrated over the same [-T, T] as S; full_line: over the whole line.
enum class GrafHorizon { matched, full_line };

struct ScatterConfig {
  GridSpec grid{64, 16.0};
  double T = 3.0;
  double dt = 2e-3;
  bool T_growth_check = false;
  GrafMode graf = GrafMode::off;
  GrafHorizon graf_horizon = GrafHorizon::matched;
  double tolerance = 1e-4;
  Comparison comparison = Comparison::continuous;
  FrameMode mode = FrameMode::lens;
  double skip_tolerance = 0.0;
  double band_tolerance = 1e-8;
  double potential_smoothing = 0.0;

  EvolveConfig evolve_config() const;
};

void validate(const ScatterConfig& cfg);

struct PacketSpec {
  double width = 1.0;
  Vec2 center = Vec2::Zero();  // relative to the line offset
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, WaveFunction at_T, WaveFunction at_2T, double change)
      : Error(what), at_T_(std::move(at_T)), at_2T_(std::move(at_2T)), change_(change) {}
  const WaveFunction& at_T() const { return at_T_; }
  const WaveFunction& at_2T() const { return at_2T_; }
  double change() const { return change_; }

 private:
  WaveFunction at_T_, at_2T_;
  double change_;
};

// phi_v at time 0: frame q = offset, p = v, S = v.offset; envelope a Gaussian around spec.center.
WaveFunction boosted_packet(const GridSpec& grid, const PacketSpec& spec, const Vec2& v, const Vec2& offset);

// U_comp(T)^* U(T, -T) U_comp(-T) phi with U_comp the comparison dynamics of cfg.comparison.
WaveFunction s_lambda_apply(const WaveFunction& phi, const PotentialSpec& potential, const ModelParams& params,
                            const ScatterConfig& cfg);
// Same, and when cfg.T_growth_check also at 2T; throws ConvergenceError if the change exceeds
// cfg.tolerance (relative L2).
WaveFunction s_lambda_apply_checked(const WaveFunction& phi, const PotentialSpec& potential, const ModelParams& params,
                                    const ScatterConfig& cfg, double* horizon_change);

struct PairingResult {
  Vec2 v = Vec2::Zero();
  int j = 2;                       // 1, 2, or 0 for the direction perpendicular to v
  Vec2 direction = Vec2(0, 1);     // unit vector e with p_e = e.p
  Vec2 offset = Vec2::Zero();
  cplx value{0.0, 0.0};            // Graf-corrected when graf mode is on
  cplx value_unmodified{0.0, 0.0};
  cplx oracle{0.0, 0.0};
  double T_used = 0.0;
  double dt_used = 0.0;
  double graf_phase_total = 0.0;   // argument Gamma of I_v = e^{-i Gamma} as used
  double horizon_change = -1.0;    // |value(2T) - value(T)|, -1 when not checked
};

Vec2 j_direction(int j, const Vec2& v);

PairingResult commutator_pairing(const PacketSpec& phi0, const PacketSpec& psi0, const Vec2& v, int j,
                                 const Vec2& offset, const PotentialSpec& potential, const ModelParams& params,
                                 const ScatterConfig& cfg);

struct SweepSpec {
  std::vector<double> angles;
  std::vector<double> offsets;
  std::vector<double> speeds;
  std::vector<int> js{2};
  PacketSpec packet;
};

struct SweepOutput {
  std::string csv_path;  // empty: in-memory only
  std::string config_hash;
};

// Line through offset * n with n = (-sin theta, cos theta), v = speed (cos theta, sin theta).
Sinogram highv_sweep(const SweepSpec& spec, const PotentialSpec& potential, const ModelParams& params,
                     const ScatterConfig& cfg, int jobs = 1, const SweepOutput& out = {});

}  // namespace qstomo
