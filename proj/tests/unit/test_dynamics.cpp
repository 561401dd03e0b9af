#include <gtest/gtest.h>

#include <cmath>

#include "qstomo/dynamics.hpp"
#include "qstomo/errors.hpp"
#include "qstomo/quadprop.hpp"

using namespace qstomo;

namespace {
const ModelParams kP = ModelParams::make(2.0, 0.8);
PotentialSpec bump() {
  PotentialSpec s;
  s.regular.push_back(RegularTerm{RegularKind::gaussian, 1.0, Vec2(0.0, 1.0), 1.0});
  return s;
}
}  // namespace

TEST(Evolve, LensModeIsExactForZeroPotential) {
  const GridSpec g = GridSpec::make(64, 16.0);
  const WaveFunction psi = gaussian_packet(g, 1.0, Vec2(0.2, 0.0), Vec2(3.0, 0.0));
  EvolveConfig cfg;
  cfg.mode = FrameMode::lens;
  cfg.dt = 0.05;
  const WaveFunction a = evolve(psi, -2.5, 3.0, PotentialSpec{}, kP, cfg);
  const auto f = compose(comparison_factorization(3.0, kP, Comparison::continuous),
                         comparison_factorization(-2.5, kP, Comparison::continuous).adjoint());
  const WaveFunction b = apply(f, psi);
  EXPECT_LT(l2_distance(snap_frame(a, b.frame, 1e-9), b), 1e-10);
}

TEST(Evolve, StrangIsSecondOrder) {
  const GridSpec g = GridSpec::make(64, 16.0);
  const WaveFunction psi = gaussian_packet(g, 1.0, Vec2(-1.0, 0.0), Vec2(2.0, 0.0));
  EvolveConfig cfg;
  cfg.dt = 0.02;
  cfg.mode = FrameMode::lens;
  const ConvergenceReport r = convergence_probe(psi, 0.0, 1.0, bump(), kP, cfg);
  EXPECT_NEAR(r.order_estimate, 2.0, 0.15);
}

TEST(Evolve, NormConserved) {
  const GridSpec g = GridSpec::make(64, 16.0);
  const WaveFunction psi = gaussian_packet(g, 1.0, Vec2::Zero(), Vec2(4.0, 0.0));
  EvolveConfig cfg;
  cfg.dt = 0.01;
  cfg.mode = FrameMode::lens;
  EXPECT_NEAR(norm(evolve(psi, -1.5, 1.5, bump(), kP, cfg)), 1.0, 1e-12);
}

TEST(Evolve, BandGuardRaises) {
  // Momentum far above the envelope band leaves the grid in the unframed picture.
  const GridSpec g = GridSpec::make(64, 16.0);
  WaveFunction psi = gaussian_packet(g, 1.0, Vec2::Zero(), Vec2::Zero());
  EvolveConfig cfg;
  cfg.dt = 0.01;
  cfg.mode = FrameMode::comoving;
  cfg.band_check_every = 1;
  EXPECT_THROW(evolve(psi, 0.0, 3.0, PotentialSpec{}, kP, cfg), AliasingError);
}

TEST(Evolve, CheckerRejectsBadConfig) {
  EvolveConfig cfg;
  cfg.dt = -1.0;
  EXPECT_THROW(validate(cfg), ConfigError);
}
