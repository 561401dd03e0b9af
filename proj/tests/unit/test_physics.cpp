#include <gtest/gtest.h>

#include <cmath>

#include "qstomo/errors.hpp"
#include "qstomo/physics.hpp"
#include "qstomo/potential.hpp"

using namespace qstomo;

TEST(Lambda, RootOfIndicialEquation) {
  EXPECT_DOUBLE_EQ(lambda_of_sigma(2.0), 2.0);
  EXPECT_DOUBLE_EQ(lambda_of_sigma(6.0), 3.0);
  EXPECT_NEAR(lambda_of_sigma(0.25), 0.5 * (1.0 + std::sqrt(2.0)), 1e-15);
  for (double s : {0.1, 1.25, 3.7}) {
    const double l = lambda_of_sigma(s);
    EXPECT_NEAR(l * (l - 1.0), s, 1e-13 * s);
    EXPECT_GT(l, 1.0);
  }
  EXPECT_THROW(lambda_of_sigma(0.0), DomainError);
}

TEST(Params, ShortRangeWindow) {
  EXPECT_NO_THROW(ModelParams::make(2.0, 0.8));
  EXPECT_NO_THROW(ModelParams::make(6.0, 0.4));
  try {
    ModelParams::make(2.0, 0.5);
    FAIL() << "rho = 1/lambda accepted";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("Assumption 1"), std::string::npos);
  }
  EXPECT_THROW(ModelParams::make(2.0, 1.0), ConfigError);
  EXPECT_THROW(params_from_json({{"sigma", 2.0}, {"rho", 0.8}, {"lambda", 2.1}}), ConfigError);
  EXPECT_THROW(params_from_json({{"sigma", 2.0}, {"rho", 0.8}, {"bogus", 1}}), ConfigError);
  const ModelParams p = params_from_json({{"sigma", 2.0}, {"rho", 0.8}, {"lambda", 2.0}});
  EXPECT_DOUBLE_EQ(p.omega, std::sqrt(2.0));
}

TEST(Coefficient, ContinuousWithDefaultOmega) {
  const ModelParams p = ModelParams::make(2.0, 0.8);
  EXPECT_DOUBLE_EQ(k_coeff(1.0, p), 2.0);
  EXPECT_NEAR(k_coeff(1.0 + 1e-12, p), 2.0, 1e-10);
  EXPECT_DOUBLE_EQ(k_coeff(-4.0, p), 2.0 / 16.0);
}

TEST(Mesh, HitsBreakpoints) {
  const auto m = time_mesh(-3.0, 3.0, 0.4);
  EXPECT_DOUBLE_EQ(m.front(), -3.0);
  EXPECT_DOUBLE_EQ(m.back(), 3.0);
  int hits = 0;
  for (double t : m) hits += (t == -1.0 || t == 1.0);
  EXPECT_EQ(hits, 2);
  for (size_t i = 1; i < m.size(); ++i) EXPECT_LE(m[i] - m[i - 1], 0.4 + 1e-14);
  const auto back = time_mesh(2.0, -2.0, 0.5);
  EXPECT_GT(back.front(), back.back());
}

TEST(Flow, PowerLawSolution) {
  // x = t^lambda solves x'' = sigma x / t^2.
  for (double s : {0.25, 2.0, 6.0}) {
    const ModelParams p = ModelParams::make(s, 0.5 * (1.0 / lambda_of_sigma(s) + 1.0));
    const Mat2 m = flow_matrix(1.0, 10.0, p);
    const double l = p.lambda;
    const double x = m(0, 0) + m(0, 1) * l;
    const double v = m(1, 0) + m(1, 1) * l;
    EXPECT_NEAR(x / std::pow(10.0, l), 1.0, 1e-12);
    EXPECT_NEAR(v / (l * std::pow(10.0, l - 1.0)), 1.0, 1e-12);
  }
}

TEST(Flow, MatrixMatchesRk4AndIsSymplectic) {
  const ModelParams p = ModelParams::make(2.0, 0.8);
  for (auto [t0, t1] : {std::pair{0.0, 0.7}, {-3.0, 2.5}, {1.5, -2.0}}) {
    const Mat2 m = flow_matrix(t0, t1, p);
    EXPECT_NEAR(m.determinant(), 1.0, 1e-15 * m.squaredNorm() + 1e-14);
    const ClassicalPath a = classical_flow_from(PhasePoint{Vec2(1, 0), Vec2(0, 1), 0.0}, t0, t1, 1e-3, p);
    EXPECT_NEAR(a.q.back()[0], m(0, 0), 1e-9 * std::abs(m(0, 0)) + 1e-9);
    EXPECT_NEAR(a.p.back()[0], m(1, 0), 1e-9 * std::abs(m(1, 0)) + 1e-9);
    EXPECT_NEAR(a.q.back()[1], m(0, 1), 1e-9 * std::abs(m(0, 1)) + 1e-9);
    EXPECT_NEAR(a.p.back()[1], m(1, 1), 1e-9 * std::abs(m(1, 1)) + 1e-9);
  }
  EXPECT_TRUE(flow_matrix(-2.0, 3.0, p).isApprox(flow_matrix(0.5, 3.0, p) * flow_matrix(-2.0, 0.5, p), 1e-12));
}

TEST(Alpha, PiecewiseTrajectory) {
  const ModelParams p = ModelParams::make(2.0, 0.8);
  // Inner piece is the true flow from q = 0, p = 1; outer piece is t^lambda / (2 lambda - 1).
  for (double t : {0.3, 0.8, 1.0}) EXPECT_NEAR(alpha(t, p), flow_matrix(0.0, t, p)(0, 1), 1e-14);
  for (double t : {1.5, 2.0, 5.0}) EXPECT_DOUBLE_EQ(alpha(t, p), std::pow(t, 2.0) / 3.0);
  for (double t : {0.3, 1.0, 2.0, 5.0}) EXPECT_EQ(alpha(-t, p), -alpha(t, p));
  EXPECT_GT(std::abs(alpha(1.0, p) - alpha(1.0 + 1e-12, p)), 1.0);
}

TEST(Graf, PhaseAgainstBruteForce) {
  const ModelParams p = ModelParams::make(6.0, 0.4);
  PotentialSpec pot;
  pot.regular.push_back(RegularTerm{RegularKind::gaussian, 1.0, Vec2(0.0, 1.0), 1.0});
  const Vec2 v(8.0, 0.0), off(0.0, 0.5);
  // Composite Simpson on each side of the jump of alpha at t = 1, with the two pieces written out.
  auto pos = [&](double t, bool outer) {
    return outer ? std::pow(t, p.lambda) / (2 * p.lambda - 1) : std::sinh(p.omega * t) / p.omega;
  };
  auto simpson = [&](double a, double b, bool outer) {
    const int n = 20000;
    const double h = (b - a) / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i)
      s += (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0)) * eval_v_reg(pot, off + pos(a + i * h, outer) * v);
    return s * h / 3.0;
  };
  EXPECT_NEAR(graf_phase(v, 2.0, pot, p, off), simpson(0.0, 1.0, false) + simpson(1.0, 2.0, true), 1e-10);
  const double total = graf_phase_total(v, pot, p, off);
  EXPECT_NEAR(total, graf_phase(v, kInfinity, pot, p, off) - graf_phase(v, -kInfinity, pot, p, off), 1e-10);
  // ~ line integral / |v| at high speed: sqrt(2 pi) exp(-1/8) / 8 for the offset 0.5 line.
  EXPECT_GT(total, 0.0);
  EXPECT_LT(total, std::sqrt(2.0 * kPi) / 8.0 * 1.01);
}
