#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qstomo/field.hpp"
#include "qstomo/potential.hpp"
#include "qstomo/scatter.hpp"
#include "qstomo/sinogram.hpp"

namespace qstomo {

struct FieldGrid {
  int n = 0;
  double extent = 0.0;
  std::vector<double> values;  // row-major, values[i * n + j] at (coord(i), coord(j))

  static FieldGrid zeros(int n, double extent);
  double h() const { return extent / n; }
  double coord(int i) const { return -0.5 * extent + i * h(); }
  double& at(int i, int j) { return values[static_cast<size_t>(i) * n + j]; }
  double at(int i, int j) const { return values[static_cast<size_t>(i) * n + j]; }
};

FieldGrid sample_field(const std::function<double(const Vec2&)>& f, int n, double extent);
// ||a - ref|| / ||ref|| over the centred square covering `fraction` of the extent per axis.
double relative_l2(const FieldGrid& a, const FieldGrid& ref, double fraction = 1.0);

// int dt [ (V^sing(x + offset + t v_hat) p_e Phi0, Psi0) - (V^sing Phi0, p_e Psi0)
//          + (i (e.grad V^reg)(x + offset + t v_hat) Phi0, Psi0) ], (f, g) linear in f.
// The x integral is split into coordinates along and across v_hat, so the t integral becomes
// a line integral per transverse coordinate; all three are adaptive Gauss-Kronrod.
cplx oracle_rhs(const PotentialSpec& potential, const PacketSpec& phi0, const PacketSpec& psi0, const Vec2& v_hat,
                const Vec2& offset, const Vec2& direction, const GridSpec& grid);

struct XrayOptions {
  double half_length = 40.0;   // finite core [-L, L]; tails by exp-sinh quadrature
  std::vector<double> breakpoints;  // extra split points in the line parameter
};

// int f(offset n + t u) dt, u = (cos angle, sin angle), n = (-sin angle, cos angle).
double xray_forward(const std::function<double(const Vec2&)>& f, double angle, double offset,
                    const XrayOptions& opts = {});

enum class Filter { ram_lak, shepp_logan };

// values are angle-major: values[a * offsets.size() + o].
FieldGrid fbp_invert(const std::vector<double>& angles, const std::vector<double>& offsets,
                     const std::vector<double>& values, Filter filter, std::optional<double> deconvolve_width,
                     int n_out, double extent_out, int jobs = 1);

FieldGrid potential_from_gradient(const FieldGrid& gx, const FieldGrid& gy);

struct UniquenessReport {
  double max_abs_diff = 0.0;
  double noise_floor = 0.0;
  bool distinguishable = false;
};

UniquenessReport uniqueness_demo(const PotentialSpec& v1, const PotentialSpec& v2, const SweepSpec& sweep,
                                 const ModelParams& params, const ScatterConfig& cfg, int jobs = 1);

// <base>.bin (float64 LE row-major), <base>.json sidecar, <base>.csv preview.
void write_field(const std::string& base, const FieldGrid& f, const std::string& config_hash = "",
                 const std::string& quantity = "");
FieldGrid read_field(const std::string& base);

}  // namespace qstomo
