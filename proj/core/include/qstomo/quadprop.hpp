#pragma once

#include <nlohmann/json.hpp>
#include <vector>

#include "qstomo/field.hpp"
#include "qstomo/physics.hpp"

namespace qstomo {

// chirp a: e^{i a x^2/2}; dilate theta: e^{i theta A}, psi -> e^{theta} psi(e^{theta} x);
// free tau: e^{-i tau p^2/2}; const_phase phi: e^{i phi}.
enum class FactorKind { chirp, dilate, free, const_phase };

struct Factor {
  FactorKind kind;
  double value;
};

enum class Branch { mehler, lambda_plus, lambda_minus, composite };

struct QuadFactorization {
  // Operator order: the last factor acts first.
  std::vector<Factor> factors;
  double t = 0.0;
  Branch branch = Branch::mehler;

  QuadFactorization adjoint() const;
  // Classical matrix acting on (x, p) expectations.
  Mat2 symplectic() const;
  double total_phase() const;
};

// outer o inner
QuadFactorization compose(const QuadFactorization& outer, const QuadFactorization& inner);
Mat2 factor_matrix(const Factor& f);
WaveFunction apply(const QuadFactorization& fac, const WaveFunction& psi);

// Parameters of e^{-itH0} (k = omega^2) as chirp o dilate o free.
struct MehlerParameters {
  double chirp;
  double dilate;
  double free;
  double const_phase;
};
MehlerParameters mehler_parameters(double t, const ModelParams& params);

QuadFactorization mehler_factorization(double t, const ModelParams& params);
// Same formula without the |t| <= 1 restriction; the propagator of the constant-k piece.
QuadFactorization mehler_any(double t, const ModelParams& params);
QuadFactorization u0_lambda_factorization(double t, const ModelParams& params);

// Free propagator from time s to time t when both lie in one branch.
QuadFactorization u0_two_time_factorization(double s, double t, const ModelParams& params);
WaveFunction u0_two_time(const WaveFunction& psi, double s, double t, const ModelParams& params);

// continuous: the free propagator U0(t, 0) (Mehler inside, Mehler(+-1) then the two-time map outside).
// lambda_literal: U0,lambda(t) used directly for |t| > 1.
enum class Comparison { continuous, lambda_literal };
QuadFactorization comparison_factorization(double t, const ModelParams& params, Comparison mode);

// (a, b) with e^{itH0} p_j e^{-itH0} = a x_j + b p_j, |t| <= 1.
std::pair<double, double> heisenberg_p_coefficients(double t, const ModelParams& params);
// (a, b) with U0,lambda(t) p_j U0,lambda(t)^* = a x_j + b p_j, |t| > 1.
std::pair<double, double> lambda_conjugated_p_coefficients(double t, const ModelParams& params);

nlohmann::json to_json(const QuadFactorization& f);
QuadFactorization factorization_from_json(const nlohmann::json& j);

}  // namespace qstomo
