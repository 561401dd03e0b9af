#include <gtest/gtest.h>

#include <cmath>

#include "qstomo/errors.hpp"
#include "qstomo/quadprop.hpp"
#include "qstomo/validation.hpp"

using namespace qstomo;

namespace {
const ModelParams kP = ModelParams::make(2.0, 0.8);
const GridSpec kGrid = GridSpec::make(128, 16.0);
}  // namespace

TEST(Mehler, ClassicalMatrixIsTheFlow) {
  for (double t : {-1.0, -0.4, 0.3, 1.0}) {
    const Mat2 m = mehler_factorization(t, kP).symplectic();
    EXPECT_TRUE(m.isApprox(flow_matrix(0.0, t, kP), 1e-12)) << t;
  }
  const auto mp = mehler_parameters(0.5, kP);
  const double w = kP.omega;
  EXPECT_NEAR(mp.free, std::tanh(0.5 * w) / w, 1e-14);
}

TEST(Mehler, RejectsOuterTimes) { EXPECT_THROW(mehler_factorization(1.5, kP), DomainError); }

TEST(Comparison, ContinuousMatchesFlowEverywhere) {
  for (double t : {-4.0, -1.5, 0.5, 2.0, 6.0}) {
    const Mat2 m = comparison_factorization(t, kP, Comparison::continuous).symplectic();
    EXPECT_TRUE(m.isApprox(flow_matrix(0.0, t, kP), 1e-11)) << t;
  }
}

TEST(Comparison, AdjointInvertsState) {
  const WaveFunction psi = checks::random_state(kGrid, 7);
  const auto f = comparison_factorization(2.5, kP, Comparison::continuous);
  const WaveFunction back = apply(f.adjoint(), apply(f, psi));
  EXPECT_LT(l2_distance(snap_frame(back, psi.frame, 1e-10), psi), 1e-11);
}

TEST(Comparison, LambdaBranchMatrixMapsTrajectory) {
  // U0,lambda(t) transports x = c t^lambda, not the flow from 0.
  const Mat2 m = u0_lambda_factorization(3.0, kP).symplectic();
  EXPECT_NEAR(m.determinant(), 1.0, 1e-12);
}

TEST(TwoTime, Cocycle) {
  const auto r = checks::cocycle(kP, kGrid, 1.5, 2.5, 4.0, 11);
  EXPECT_TRUE(r.passed) << r.residual;
  const auto m = checks::cocycle(kP, kGrid, -1.5, -2.5, -4.0, 12);
  EXPECT_TRUE(m.passed) << m.residual;
  EXPECT_TRUE(u0_two_time_factorization(1.5, 4.0, kP).symplectic().isApprox(flow_matrix(1.5, 4.0, kP), 1e-12));
}

TEST(Heisenberg, InnerCoefficients) {
  const auto [a, b] = heisenberg_p_coefficients(0.6, kP);
  EXPECT_NEAR(a, kP.omega * std::sinh(0.6 * kP.omega), 1e-15);
  EXPECT_NEAR(b, std::cosh(0.6 * kP.omega), 1e-15);
  const auto r = checks::heisenberg_inner(kP, kGrid, 0.6);
  EXPECT_TRUE(r.passed) << r.residual;
}

TEST(Heisenberg, OuterDerivedCoefficients) {
  // Hand derivation: U p U* = b p + a x with a = (lambda - 1) / (t |t|^{lambda-1}), b = |t|^{1-lambda}.
  const auto r = checks::heisenberg_outer(kP, kGrid, 2.5);
  EXPECT_LT(r.detail["p_coeff_residual"].get<double>(), 1e-8);
  EXPECT_LT(r.detail["x_coeff_derived_residual"].get<double>(), 1e-8);
  const auto [a, b] = lambda_conjugated_p_coefficients(2.5, kP);
  EXPECT_NEAR(a, r.detail["x_coeff_derived"].get<double>(), 1e-15);
  EXPECT_NEAR(b, std::pow(2.5, 1.0 - kP.lambda), 1e-15);
}

TEST(Factorization, JsonRoundTrip) {
  const auto f = comparison_factorization(-3.0, kP, Comparison::continuous);
  const auto r = factorization_from_json(to_json(f));
  ASSERT_EQ(r.factors.size(), f.factors.size());
  for (size_t i = 0; i < f.factors.size(); ++i) {
    EXPECT_EQ(r.factors[i].kind, f.factors[i].kind);
    EXPECT_EQ(r.factors[i].value, f.factors[i].value);
  }
}
