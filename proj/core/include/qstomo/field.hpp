#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "qstomo/types.hpp"

namespace qstomo {

// Uniform periodic grid on [-L/2, L/2)^2 with n points per axis.
struct GridSpec {
  int n = 64;
  double extent = 16.0;

  static GridSpec make(int n, double extent);
  double h() const { return extent / n; }
  double coord(int i) const { return -0.5 * extent + i * h(); }
  // FFT ordering; index n/2 carries -pi/h.
  double wavenumber(int i) const { return 2.0 * kPi / extent * (i < n / 2 ? i : i - n); }
  std::vector<double> coords() const;
  std::vector<double> wavenumbers() const;
  long size() const { return static_cast<long>(n) * n; }
  bool operator==(const GridSpec& o) const { return n == o.n && extent == o.extent; }
};

// psi(x) = e^{iS} e^{i p.(x-q)} e^{i chirp |x-q|^2/2} scale^{-1} u((x-q)/scale)
struct Frame {
  Vec2 q = Vec2::Zero();
  Vec2 p = Vec2::Zero();
  double phase = 0.0;
  double scale = 1.0;
  double chirp = 0.0;

  static Frame identity() { return Frame{}; }
  // Frame of the operator (this) o (inner).
  Frame compose(const Frame& inner) const;
  // Equality of q, p, scale and chirp; the phase is allowed to differ.
  bool same_geometry(const Frame& o, double tol = 1e-12) const;
  bool approx_equal(const Frame& o, double tol = 1e-12) const;
};

struct WaveFunction {
  GridSpec grid;
  Frame frame;
  CVec env;

  WaveFunction() = default;
  WaveFunction(const GridSpec& g, const Frame& f) : grid(g), frame(f), env(static_cast<size_t>(g.size())) {}
  cplx& at(int i, int j) { return env[static_cast<size_t>(i) * grid.n + j]; }
  const cplx& at(int i, int j) const { return env[static_cast<size_t>(i) * grid.n + j]; }
};

WaveFunction gaussian_packet(const GridSpec& grid, double width, const Vec2& center, const Vec2& boost);
// Momentum-space bump: u^ proportional to exp(1 - 1/(1 - |xi|^2/kmax^2)) on |xi| < kmax.
WaveFunction momentum_bump_packet(const GridSpec& grid, double kmax, const Vec2& center, const Vec2& boost);

double norm2(const WaveFunction& a);
double norm(const WaveFunction& a);
// Linear in b, antilinear in a.
cplx inner(const WaveFunction& a, const WaveFunction& b);
// Scalar product linear in the first slot: pair(f, g) = inner(g, f).
cplx pair(const WaveFunction& f, const WaveFunction& g);
// ||a - b|| for two states in the same frame geometry.
double l2_distance(const WaveFunction& a, const WaveFunction& b);
WaveFunction axpy(cplx alpha, const WaveFunction& x, const WaveFunction& y);

// (e.p - e.frame.p) psi, with e a direction (axis j is e = unit_j).
WaveFunction apply_rel_momentum(const WaveFunction& psi, int j);
WaveFunction apply_rel_momentum_dir(const WaveFunction& psi, const Vec2& e);

WaveFunction chirp_multiply(const WaveFunction& psi, double a);
WaveFunction dilate(const WaveFunction& psi, double theta);
WaveFunction free_step(const WaveFunction& psi, double tau);
WaveFunction phase_shift(const WaveFunction& psi, double phi);
// Metaplectic action of the symplectic matrix m (same on both axes); only the envelope lens
// part needs an FFT. Throws DomainError at an exact focus.
WaveFunction apply_symplectic(const WaveFunction& psi, const Mat2& m);

// In-place envelope free step e^{-i tau xi^2/2} in envelope coordinates.
void envelope_free_step(WaveFunction& psi, double tau);
void envelope_parity(WaveFunction& psi);

// Absorb the frame chirp into the envelope (exact, no interpolation).
WaveFunction materialize_chirp(const WaveFunction& psi);
// Equal physical state on a target grid in a target frame, by band-limited trigonometric
// interpolation. Mass outside the target window above tol raises AliasingError.
WaveFunction reframe(const WaveFunction& psi, const GridSpec& target, const Frame& target_frame,
                     double tol = 1e-10);
WaveFunction resample_to_unit_scale(const WaveFunction& psi, double tol = 1e-10);
// Physical samples on a grid with the identity frame.
WaveFunction to_physical(const WaveFunction& psi, const GridSpec& target, double tol = 1e-10);
// Replace a frame that differs from target only by rounding; residual phase/momentum/chirp
// are moved into the envelope. Throws ContractError if the geometry differs by more than tol.
WaveFunction snap_frame(const WaveFunction& psi, const Frame& target, double tol = 1e-8);

struct Moments {
  double norm = 0.0;
  Vec2 mean_x = Vec2::Zero();
  Vec2 mean_p = Vec2::Zero();
  Vec2 var_x = Vec2::Zero();
  Vec2 var_p = Vec2::Zero();
  Vec2 cov_xp = Vec2::Zero();  // symmetrized, per axis
};
Moments moments(const WaveFunction& psi);

// Fraction of envelope mass in the outer max(1, ceil(0.02 n)) rows/columns.
double boundary_band_fraction(const WaveFunction& psi);
// Fraction of spectral mass in the outer band of wavenumbers.
double spectral_band_fraction(const WaveFunction& psi);

nlohmann::json to_json(const Frame& f);
Frame frame_from_json(const nlohmann::json& j);

// <base>.bin (little-endian float64 re/im pairs, row-major) and <base>.json sidecar.
void write_wavefunction(const std::string& base, const WaveFunction& psi, const std::string& config_hash = "");
WaveFunction read_wavefunction(const std::string& base);

}  // namespace qstomo
