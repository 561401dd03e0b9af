#pragma once

#include <nlohmann/json.hpp>
#include <limits>
#include <optional>
#include <vector>

#include "qstomo/types.hpp"

namespace qstomo {

struct PotentialSpec;

struct ModelParams {
  double omega = 1.0;
  double sigma = 1.0;
  double lambda = 0.0;
  double rho = 0.0;
  int dim = 2;

  // omega defaults to sqrt(sigma), which makes k(t) continuous at |t| = 1.
  static ModelParams make(double sigma, double rho, std::optional<double> omega = std::nullopt);
  bool sigma_le_2() const { return sigma <= 2.0; }
};

// Throws ConfigError when the stored fields violate the invariants (including 1/lambda < rho < 1).
void validate(const ModelParams& params);
nlohmann::json to_json(const ModelParams& params);
ModelParams params_from_json(const nlohmann::json& j);

double lambda_of_sigma(double sigma);
double k_coeff(double t, const ModelParams& params);
double alpha(double t, const ModelParams& params);

struct PhasePoint {
  Vec2 q = Vec2::Zero();
  Vec2 p = Vec2::Zero();
  double action = 0.0;
};

struct ClassicalPath {
  std::vector<double> times;
  std::vector<Vec2> q;
  std::vector<Vec2> p;
  std::vector<double> action;
};

// Mesh from t0 to t1 (either direction) with steps no longer than dt; the breakpoints
// strictly inside the span are mesh points.
std::vector<double> time_mesh(double t0, double t1, double dt, const std::vector<double>& breakpoints = {-1.0, 1.0});

// Coefficient of the piece containing the step [ta, tb]; resolves the jump at |t| = 1.
double k_on_step(double t, double ta, double tb, const ModelParams& params);

// One RK4 step of q' = p, p' = k q, S' = p^2/2 + k q^2/2.
PhasePoint rk4_step(const PhasePoint& z, double ta, double tb, const ModelParams& params);

ClassicalPath classical_flow(const Vec2& v, double t0, double t1, double dt, const ModelParams& params);
ClassicalPath classical_flow_from(const PhasePoint& start, double t0, double t1, double dt, const ModelParams& params);

// Fundamental matrix of (x, p) from t0 to t1 for the quadratic flow, in closed form.
Mat2 flow_matrix(double t0, double t1, const ModelParams& params);

struct GrafResult {
  double phase = 0.0;
  double error_estimate = 0.0;
  double tail_bound = 0.0;
  double truncation_time = 0.0;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Integral of V^reg(offset + alpha(tau) v) from 0 to t_end; t_end may be +-kInfinity.
GrafResult graf_phase_detail(const Vec2& v, double t_end, const PotentialSpec& potential, const ModelParams& params,
                             const Vec2& offset = Vec2::Zero());
double graf_phase(const Vec2& v, double t_end, const PotentialSpec& potential, const ModelParams& params,
                  const Vec2& offset = Vec2::Zero());
// Integral over the whole line, the argument of the scalar modifier I_v.
double graf_phase_total(const Vec2& v, const PotentialSpec& potential, const ModelParams& params,
                        const Vec2& offset = Vec2::Zero());

}  // namespace qstomo
