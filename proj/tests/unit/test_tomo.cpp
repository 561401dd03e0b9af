#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "qstomo/errors.hpp"
#include "qstomo/tomo.hpp"

using namespace qstomo;

namespace {

PotentialSpec bump(const Vec2& c = Vec2(0.0, 1.0)) {
  PotentialSpec s;
  s.regular.push_back(RegularTerm{RegularKind::gaussian, 1.0, c, 1.0});
  return s;
}

}  // namespace

TEST(Xray, GaussianLineIntegral) {
  const PotentialSpec s = bump(Vec2(0.5, 1.0));
  auto f = [&](const Vec2& x) { return eval_v(s, x); };
  for (double th : {0.0, 0.7, 2.0})
    for (double off : {-1.0, 0.0, 1.3}) {
      const Vec2 n(-std::sin(th), std::cos(th));
      const double d = off - n.dot(Vec2(0.5, 1.0));
      EXPECT_NEAR(xray_forward(f, th, off), std::sqrt(2 * kPi) * std::exp(-d * d / 2), 1e-11);
    }
}

TEST(Xray, PowerDecayTails) {
  PotentialSpec s;
  s.regular.push_back(RegularTerm{RegularKind::power_decay, 1.0, Vec2::Zero(), 2.0});
  // int (1 + d^2 + t^2)^{-1} dt = pi / sqrt(1 + d^2)
  auto f = [&](const Vec2& x) { return eval_v(s, x); };
  EXPECT_NEAR(xray_forward(f, 0.3, 1.0), kPi / std::sqrt(2.0), 1e-9);
}

TEST(Fbp, RoundTripOfSmoothField) {
  const PotentialSpec s = bump();
  auto f = [&](const Vec2& x) { return grad_v(s, x)[1]; };
  std::vector<double> ang, off, vals;
  const int m = 128, k = 65;
  for (int a = 0; a < m; ++a) ang.push_back(kPi * a / m);
  for (int o = 0; o < k; ++o) off.push_back(-6.0 + 12.0 * o / (k - 1));
  for (double a : ang)
    for (double o : off) vals.push_back(xray_forward(f, a, o));
  const FieldGrid rec = fbp_invert(ang, off, vals, Filter::ram_lak, std::nullopt, 64, 10.0);
  const FieldGrid ref = sample_field(f, 64, 10.0);
  EXPECT_LT(relative_l2(rec, ref), 0.05);
  const FieldGrid rec2 = fbp_invert(ang, off, vals, Filter::shepp_logan, std::nullopt, 64, 10.0, 3);
  EXPECT_LT(relative_l2(rec2, ref), 0.05);
  EXPECT_THROW(fbp_invert(ang, {0.0, 1.0, 3.0}, std::vector<double>(3 * m), Filter::ram_lak, std::nullopt, 64, 10),
               ConfigError);
}

TEST(Fbp, DeterministicAcrossJobs) {
  std::vector<double> ang{0.0, 0.5, 1.0, 1.5, 2.0, 2.5}, off;
  for (int o = 0; o < 17; ++o) off.push_back(-4.0 + 0.5 * o);
  std::vector<double> vals;
  for (size_t i = 0; i < ang.size() * off.size(); ++i) vals.push_back(std::sin(0.37 * i));
  const FieldGrid a = fbp_invert(ang, off, vals, Filter::ram_lak, 1.0, 32, 8.0, 1);
  const FieldGrid b = fbp_invert(ang, off, vals, Filter::ram_lak, 1.0, 32, 8.0, 4);
  EXPECT_EQ(a.values, b.values);
}

TEST(Poisson, PotentialFromExactGradient) {
  const PotentialSpec s = bump(Vec2(0.3, -0.2));
  const FieldGrid gx = sample_field([&](const Vec2& x) { return grad_v(s, x)[0]; }, 64, 12.0);
  const FieldGrid gy = sample_field([&](const Vec2& x) { return grad_v(s, x)[1]; }, 64, 12.0);
  const FieldGrid v = potential_from_gradient(gx, gy);
  const FieldGrid ref = sample_field([&](const Vec2& x) { return eval_v(s, x); }, 64, 12.0);
  EXPECT_LT(relative_l2(v, ref), 1e-3);
}

TEST(Field, L2Helper) {
  FieldGrid a = FieldGrid::zeros(8, 4.0), b = FieldGrid::zeros(8, 4.0);
  for (auto& x : b.values) x = 2.0;
  EXPECT_DOUBLE_EQ(relative_l2(a, b), 1.0);
  EXPECT_DOUBLE_EQ(relative_l2(b, b, 0.5), 0.0);
}

TEST(Field, WriteReadRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "qstomo_tomo_io";
  std::filesystem::create_directories(dir);
  const FieldGrid f = sample_field([](const Vec2& x) { return x[0] - 2 * x[1]; }, 16, 3.0);
  write_field((dir / "f").string(), f, "hash", "test");
  const FieldGrid r = read_field((dir / "f").string());
  EXPECT_EQ(r.values, f.values);
  EXPECT_EQ(r.n, 16);
  EXPECT_THROW(read_field((dir / "absent").string()), IoError);
}
