#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "qstomo/errors.hpp"
#include "qstomo/field.hpp"

using namespace qstomo;

namespace {
const GridSpec kGrid = GridSpec::make(64, 16.0);
}

TEST(Grid, RejectsNonPowerOfTwo) {
  EXPECT_THROW(GridSpec::make(48, 16.0), ConfigError);
  EXPECT_THROW(GridSpec::make(64, 0.0), ConfigError);
  EXPECT_DOUBLE_EQ(kGrid.wavenumber(32), -kPi / kGrid.h());
}

TEST(Packet, NormalizedWithGaussianMoments) {
  const WaveFunction psi = gaussian_packet(kGrid, 1.0, Vec2(0.5, -0.25), Vec2(2.0, 1.0));
  EXPECT_NEAR(norm(psi), 1.0, 1e-12);
  const Moments m = moments(psi);
  EXPECT_NEAR(m.mean_x[0], 0.5, 1e-12);
  EXPECT_NEAR(m.mean_x[1], -0.25, 1e-12);
  EXPECT_NEAR(m.mean_p[0], 2.0, 1e-10);
  EXPECT_NEAR(m.var_x[0], 0.5, 1e-10);
  EXPECT_NEAR(m.var_p[1], 0.5, 1e-10);
  EXPECT_THROW(gaussian_packet(kGrid, 0.1, Vec2::Zero(), Vec2::Zero()), ConfigError);
}

TEST(Inner, PairIsLinearInFirstSlot) {
  const WaveFunction a = gaussian_packet(kGrid, 1.0, Vec2(0.2, 0.0), Vec2(0.3, 0.0));
  const WaveFunction b = gaussian_packet(kGrid, 1.2, Vec2(-0.1, 0.4), Vec2(0.3, 0.0));
  const cplx c(0.3, -1.2);
  const WaveFunction ca = axpy(c, a, WaveFunction(a.grid, a.frame));
  EXPECT_LT(std::abs(pair(ca, b) - c * pair(a, b)), 1e-14);
  EXPECT_LT(std::abs(inner(ca, b) - std::conj(c) * inner(a, b)), 1e-14);
}

TEST(Frame, ComposeWithIdentity) {
  Frame f;
  f.q = Vec2(1, 2);
  f.p = Vec2(-0.5, 3);
  f.scale = 2.5;
  f.chirp = 0.3;
  f.phase = 0.7;
  EXPECT_TRUE(f.compose(Frame::identity()).approx_equal(f));
  EXPECT_TRUE(Frame::identity().compose(f).approx_equal(f));
  EXPECT_TRUE(frame_from_json(to_json(f)).approx_equal(f, 0.0));
}

TEST(Reframe, PreservesPhysicalState) {
  WaveFunction psi = gaussian_packet(kGrid, 1.0, Vec2(0.3, -0.2), Vec2(1.0, 0.5));
  psi.frame.q = Vec2(0.7, 0.1);
  psi.frame.chirp = 0.2;
  Frame target;
  target.q = Vec2(0.2, -0.3);
  target.p = Vec2(1.3, 0.0);
  const WaveFunction a = reframe(psi, kGrid, target);
  const WaveFunction dense = to_physical(psi, GridSpec::make(128, 24.0));
  const WaveFunction b = to_physical(a, GridSpec::make(128, 24.0));
  EXPECT_LT(l2_distance(dense, b), 1e-9);
  EXPECT_NEAR(norm(a), 1.0, 1e-10);
}

TEST(Reframe, DetectsLostMass) {
  const WaveFunction psi = gaussian_packet(kGrid, 1.0, Vec2(0, 0), Vec2(0, 0));
  Frame far;
  far.q = Vec2(7.0, 0.0);
  EXPECT_THROW(reframe(psi, kGrid, far), AliasingError);
}

TEST(Operators, ChirpAndDilationAreUnitaryAndInvertible) {
  const WaveFunction psi = gaussian_packet(kGrid, 1.0, Vec2(0.3, 0), Vec2(0.5, -0.5));
  const WaveFunction d = dilate(dilate(psi, 0.4), -0.4);
  const WaveFunction c = chirp_multiply(chirp_multiply(psi, 0.8), -0.8);
  const WaveFunction f = free_step(free_step(psi, 0.3), -0.3);
  for (const WaveFunction* w : {&d, &c, &f}) {
    const WaveFunction back = to_physical(*w, kGrid);
    EXPECT_LT(l2_distance(back, to_physical(psi, kGrid)), 1e-10);
  }
}

TEST(Operators, RelativeMomentumOfBoostedGaussian) {
  const WaveFunction psi = gaussian_packet(kGrid, 1.0, Vec2::Zero(), Vec2(4.0, 0.0));
  // <psi, (p - p_frame) psi> = 0 for a real envelope.
  EXPECT_LT(std::abs(inner(psi, apply_rel_momentum(psi, 0))), 1e-12);
  // ||p_2 psi||^2 = var(p_2) = 1/2.
  EXPECT_NEAR(norm2(apply_rel_momentum(psi, 1)), 0.5, 1e-10);
}

TEST(Band, FractionsOfCompactPacket) {
  const WaveFunction psi = gaussian_packet(kGrid, 1.0, Vec2::Zero(), Vec2::Zero());
  EXPECT_LT(boundary_band_fraction(psi), 1e-12);
  EXPECT_LT(spectral_band_fraction(psi), 1e-12);
}

TEST(Io, WaveFunctionRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "qstomo_field_io";
  std::filesystem::create_directories(dir);
  WaveFunction psi = gaussian_packet(kGrid, 1.0, Vec2(0.1, 0.2), Vec2(1.0, 2.0));
  psi.frame.scale = 1.5;
  write_wavefunction((dir / "psi").string(), psi, "abc");
  const WaveFunction r = read_wavefunction((dir / "psi").string());
  EXPECT_EQ(r.grid, psi.grid);
  EXPECT_TRUE(r.frame.approx_equal(psi.frame, 0.0));
  EXPECT_EQ(l2_distance(r, psi), 0.0);
}
