#pragma once

#include <nlohmann/json.hpp>
#include <vector>

#include "qstomo/physics.hpp"
#include "qstomo/types.hpp"

namespace qstomo {

enum class RegularKind { gaussian, power_decay };

// gaussian: A exp(-|x-c|^2 / (2 w^2)) with shape = w.
// power_decay: A <x-c>^{-rho_eff} with shape = rho_eff, <x> = sqrt(1 + |x|^2).
struct RegularTerm {
  RegularKind kind = RegularKind::gaussian;
  double amplitude = 0.0;
  Vec2 center = Vec2::Zero();
  double shape = 1.0;
};

// A / sqrt(r^2 + eps^2) * chi(r / R), chi(s) = exp(1 - 1/(1 - s^2)) on s < 1, else 0.
struct SingularTerm {
  double amplitude = 0.0;
  Vec2 center = Vec2::Zero();
  double mollifier_eps = 0.1;
  double cutoff_radius = 2.0;
};

struct PotentialSpec {
  std::vector<RegularTerm> regular;
  std::vector<SingularTerm> singular;

  bool empty() const { return regular.empty() && singular.empty(); }
  bool has_regular() const { return !regular.empty(); }
  PotentialSpec translated(const Vec2& d) const;
  PotentialSpec regular_part() const;
};

double eval_term(const RegularTerm& t, const Vec2& x);
Vec2 grad_term(const RegularTerm& t, const Vec2& x);
double eval_term(const SingularTerm& t, const Vec2& x);
Vec2 grad_term(const SingularTerm& t, const Vec2& x);

double eval_v(const PotentialSpec& spec, const Vec2& x);
Vec2 grad_v(const PotentialSpec& spec, const Vec2& x);
double eval_v_reg(const PotentialSpec& spec, const Vec2& x);
Vec2 grad_v_reg(const PotentialSpec& spec, const Vec2& x);
double eval_v_sing(const PotentialSpec& spec, const Vec2& x);

struct DecayReport {
  bool passed = true;
  double worst_ratio = 0.0;
  double growth_slope = 0.0;
  std::vector<double> radii;
  std::vector<double> ratios;
};

DecayReport check_decay(const PotentialSpec& spec, const ModelParams& params, int n_samples);

// Values of V on the points x = origin + scale * (y1[i], y2[j]), row-major in (i, j).
// Gaussian terms factor per axis, which keeps this cheap on large grids.
// smoothing > 0 samples V convolved with an isotropic Gaussian of that standard deviation:
// closed form for Gaussian terms, 2D Gauss-Hermite for the rest.
void sample_affine(const PotentialSpec& spec, const Vec2& origin, double scale, const std::vector<double>& y1,
                   const std::vector<double>& y2, std::vector<double>& out, double smoothing = 0.0);

nlohmann::json to_json(const PotentialSpec& spec);
PotentialSpec potential_from_json(const nlohmann::json& j);

}  // namespace qstomo
