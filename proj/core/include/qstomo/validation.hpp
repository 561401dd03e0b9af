#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "qstomo/dynamics.hpp"
#include "qstomo/field.hpp"
#include "qstomo/physics.hpp"
#include "qstomo/potential.hpp"

namespace qstomo::checks {

struct CheckResult {
  std::string name;
  bool passed = false;
  double residual = 0.0;
  double threshold = 0.0;
  nlohmann::json detail = nlohmann::json::object();
};

nlohmann::json to_json(const CheckResult& r);

// Band-limited random envelope, unit norm, identity frame.
WaveFunction random_state(const GridSpec& grid, std::uint64_t seed, double kmax = 3.0);

// RK4 for q'' = k(t) q from t = 1 with (q, q') = (1, lambda), compared with t^lambda at t = 10.
CheckResult lambda_newton(double sigma, double dt = 1e-3);

// Mehler factorization at t against the covariance flow of the linearized system (RK4).
CheckResult mehler_moments(const ModelParams& params, const GridSpec& grid, double t);

// V = 0 Strang evolution on [0, 1] against mehler_factorization(1).
CheckResult mehler_vs_strang(const ModelParams& params, const GridSpec& grid, double dt);

// u0_two_time(t, s) u0_two_time(s, r) against u0_two_time(t, r) on random states.
CheckResult cocycle(const ModelParams& params, const GridSpec& grid, double r, double s, double t,
                    std::uint64_t seed);

// Central difference of a free propagation against -i H0(t) psi; reports the error ratio for
// delta and delta/2.
CheckResult generator(const ModelParams& params, double t, double delta, const GridSpec& physical);

// Expectation-value coefficients of p_j conjugated by the free dynamics.
CheckResult heisenberg_inner(const ModelParams& params, const GridSpec& grid, double t);
// |t| > 1 against the quoted identity; detail also carries the derived coefficients.
CheckResult heisenberg_outer(const ModelParams& params, const GridSpec& grid, double t);

// Framed comoving evolution against a dense unframed split-step run, [0, t1].
CheckResult frame_covariance(const ModelParams& params, const PotentialSpec& pot, const Vec2& v,
                             const GridSpec& framed, const GridSpec& dense, double t1, double dt);
// With V = 0 the framed envelope does not depend on the boost.
CheckResult envelope_boost_independence(const ModelParams& params, const GridSpec& grid, const Vec2& v, double t1,
                                        double dt);

CheckResult decay_sampler(const PotentialSpec& pot, const ModelParams& params);

}  // namespace qstomo::checks
