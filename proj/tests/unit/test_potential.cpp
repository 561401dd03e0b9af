#include <gtest/gtest.h>

#include <cmath>

#include "qstomo/errors.hpp"
#include "qstomo/potential.hpp"

using namespace qstomo;

namespace {

PotentialSpec mixed() {
  PotentialSpec s;
  s.regular.push_back(RegularTerm{RegularKind::gaussian, 1.0, Vec2(0.0, 1.0), 1.0});
  s.regular.push_back(RegularTerm{RegularKind::power_decay, 0.5, Vec2(-1.0, 0.0), 0.9});
  s.singular.push_back(SingularTerm{0.3, Vec2(0.5, -1.0), 0.2, 1.5});
  return s;
}

}  // namespace

TEST(Potential, GradientMatchesFiniteDifference) {
  const PotentialSpec s = mixed();
  const double h = 1e-5;
  for (const Vec2& x : {Vec2(0.1, 0.2), Vec2(0.6, -0.7), Vec2(-2.0, 1.5)}) {
    const Vec2 g = grad_v(s, x);
    for (int a = 0; a < 2; ++a) {
      Vec2 e = Vec2::Zero();
      e[a] = h;
      EXPECT_NEAR(g[a], (eval_v(s, x + e) - eval_v(s, x - e)) / (2 * h), 1e-7);
    }
  }
}

TEST(Potential, SingularPartHasCompactSupport) {
  const PotentialSpec s = mixed();
  EXPECT_EQ(eval_v_sing(s, Vec2(0.5, -1.0) + Vec2(1.5, 0.0)), 0.0);
  EXPECT_GT(eval_v_sing(s, Vec2(0.5, -1.0)), 1.0);
  EXPECT_DOUBLE_EQ(eval_v(s, Vec2(3, 3)), eval_v_reg(s, Vec2(3, 3)));
}

TEST(Potential, AffineSamplingMatchesPointwise) {
  const PotentialSpec s = mixed();
  std::vector<double> y{-1.0, -0.25, 0.5, 2.0};
  std::vector<double> out;
  sample_affine(s, Vec2(0.3, -0.2), 1.7, y, y, out);
  for (size_t i = 0; i < y.size(); ++i)
    for (size_t j = 0; j < y.size(); ++j)
      EXPECT_NEAR(out[i * y.size() + j], eval_v(s, Vec2(0.3 + 1.7 * y[i], -0.2 + 1.7 * y[j])), 1e-13);
}

TEST(Potential, SmoothedGaussianIsClosedForm) {
  PotentialSpec s;
  s.regular.push_back(RegularTerm{RegularKind::gaussian, 2.0, Vec2(0.0, 0.0), 1.0});
  std::vector<double> y{0.0, 1.0};
  std::vector<double> out;
  const double sig = 0.5;
  sample_affine(s, Vec2::Zero(), 1.0, y, y, out, sig);
  // Convolution of two Gaussians: width^2 adds, peak scales by w^2 / (w^2 + sig^2).
  const double w2 = 1.0 + sig * sig;
  EXPECT_NEAR(out[0], 2.0 / w2, 1e-14);
  EXPECT_NEAR(out[3], 2.0 / w2 * std::exp(-2.0 / (2.0 * w2)), 1e-14);
}

TEST(Potential, SmoothingQuadratureOnSlowTerms) {
  // Gauss-Hermite against a brute-force convolution of the power-decay term.
  PotentialSpec s;
  s.regular.push_back(RegularTerm{RegularKind::power_decay, 1.0, Vec2(0.0, 0.0), 0.6});
  const double sig = 0.3;
  std::vector<double> y{0.7};
  std::vector<double> out;
  sample_affine(s, Vec2::Zero(), 1.0, y, y, out, sig);
  double acc = 0.0, wsum = 0.0;
  const int n = 400;
  const double L = 6.0 * sig, h = 2 * L / n;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      const double a = -L + i * h, b = -L + j * h;
      const double w = std::exp(-(a * a + b * b) / (2 * sig * sig));
      acc += w * eval_v(s, Vec2(0.7 + a, 0.7 + b));
      wsum += w;
    }
  EXPECT_NEAR(out[0], acc / wsum, 1e-4);
}

TEST(Potential, JsonRoundTripAndStrictKeys) {
  const PotentialSpec s = mixed();
  const PotentialSpec r = potential_from_json(to_json(s));
  for (const Vec2& x : {Vec2(0.4, 0.1), Vec2(-1.1, 0.3)}) EXPECT_DOUBLE_EQ(eval_v(s, x), eval_v(r, x));
  EXPECT_THROW(potential_from_json({{"regular", nlohmann::json::array()}, {"other", 1}}), ConfigError);
  EXPECT_THROW(potential_from_json({{"regular", {{{"kind", "cubic"}, {"amplitude", 1.0}}}}}), ConfigError);
}

TEST(Potential, DecaySampler) {
  const ModelParams p2 = ModelParams::make(2.0, 0.8);
  PotentialSpec g;
  g.regular.push_back(RegularTerm{RegularKind::gaussian, 1.0, Vec2(0.0, 1.0), 1.0});
  EXPECT_TRUE(check_decay(g, p2, 32).passed);
  PotentialSpec slow;
  slow.regular.push_back(RegularTerm{RegularKind::power_decay, 1.0, Vec2::Zero(), 0.3});
  EXPECT_FALSE(check_decay(slow, p2, 32).passed);
}
