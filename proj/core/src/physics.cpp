#include "qstomo/physics.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <sstream>

#include "qstomo/errors.hpp"
#include "qstomo/potential.hpp"

namespace qstomo {

double lambda_of_sigma(double sigma) {
  if (!(sigma > 0.0)) throw DomainError("lambda_of_sigma: sigma must be positive");
  return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * sigma));
}

ModelParams ModelParams::make(double sigma, double rho, std::optional<double> omega) {
  ModelParams p;
  p.sigma = sigma;
  p.lambda = lambda_of_sigma(sigma);
  p.omega = omega ? *omega : std::sqrt(sigma);
  p.rho = rho;
  p.dim = 2;
  validate(p);
  return p;
}

void validate(const ModelParams& p) {
  if (!(p.sigma > 0.0)) throw ConfigError("params: sigma must be positive");
  if (!(p.omega > 0.0)) throw ConfigError("params: omega must be positive");
  if (p.dim != 2) throw ConfigError("params: only dim = 2 is supported");
  if (std::abs(p.lambda * (p.lambda - 1.0) - p.sigma) > 1e-12 * p.sigma)
    throw ConfigError("params: lambda(lambda-1) != sigma");
  if (!(p.rho > 1.0 / p.lambda && p.rho < 1.0)) {
    std::ostringstream os;
    os << "params: Assumption 1 requires 1/lambda < rho < 1 (1/lambda = " << 1.0 / p.lambda << ", rho = " << p.rho
       << ")";
    throw ConfigError(os.str());
  }
}

nlohmann::json to_json(const ModelParams& p) {
  return {{"omega", p.omega}, {"sigma", p.sigma}, {"rho", p.rho}, {"lambda", p.lambda}};
}

ModelParams params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("params: expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (k != "omega" && k != "sigma" && k != "rho" && k != "lambda") throw ConfigError("params: unknown key " + k);
  }
  if (!j.contains("sigma") || !j["sigma"].is_number()) throw ConfigError("params: sigma is required");
  if (!j.contains("rho") || !j["rho"].is_number()) throw ConfigError("params: rho is required");
  std::optional<double> omega;
  if (j.contains("omega")) {
    if (!j["omega"].is_number()) throw ConfigError("params: omega must be a number");
    omega = j["omega"].get<double>();
  }
  const double sigma = j["sigma"].get<double>();
  if (!(sigma > 0.0)) throw ConfigError("params: sigma must be positive");
  ModelParams p = ModelParams::make(sigma, j["rho"].get<double>(), omega);
  if (j.contains("lambda")) {
    // lambda is derived; a stored value is only accepted when it agrees.
    if (!j["lambda"].is_number() || std::abs(j["lambda"].get<double>() - p.lambda) > 1e-12 * p.lambda)
      throw ConfigError("params: lambda is derived from sigma and the given value disagrees");
  }
  return p;
}

double k_coeff(double t, const ModelParams& p) {
  if (std::abs(t) <= 1.0) return p.omega * p.omega;
  return p.sigma / (t * t);
}

double k_on_step(double t, double ta, double tb, const ModelParams& p) {
  const double mid = 0.5 * (ta + tb);
  if (std::abs(mid) <= 1.0) return p.omega * p.omega;
  return p.sigma / (t * t);
}

double alpha(double t, const ModelParams& p) {
  const double a = std::abs(t);
  double r;
  if (a <= 1.0)
    r = std::sinh(p.omega * a) / p.omega;
  else
    r = std::pow(a, p.lambda) / (2.0 * p.lambda - 1.0);
  return t < 0 ? -r : r;
}

std::vector<double> time_mesh(double t0, double t1, double dt, const std::vector<double>& breakpoints) {
  if (!(dt > 0.0)) throw DomainError("time_mesh: dt must be positive");
  std::vector<double> nodes{t0};
  const double lo = std::min(t0, t1), hi = std::max(t0, t1);
  std::vector<double> inner;
  for (double b : breakpoints)
    if (b > lo && b < hi) inner.push_back(b);
  std::sort(inner.begin(), inner.end());
  if (t1 < t0) std::reverse(inner.begin(), inner.end());
  inner.push_back(t1);
  std::vector<double> mesh{t0};
  double a = t0;
  for (double b : inner) {
    const double len = std::abs(b - a);
    if (len == 0.0) continue;
    const long m = std::max(1L, static_cast<long>(std::ceil(len / dt - 1e-9)));
    for (long i = 1; i < m; ++i) mesh.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(m));
    mesh.push_back(b);
    a = b;
  }
  return mesh;
}

PhasePoint rk4_step(const PhasePoint& z, double ta, double tb, const ModelParams& p) {
  const double h = tb - ta;
  auto deriv = [&](double t, const Vec2& q, const Vec2& pp, Vec2& dq, Vec2& dp) {
    const double k = k_on_step(t, ta, tb, p);
    dq = pp;
    dp = k * q;
    return 0.5 * pp.squaredNorm() + 0.5 * k * q.squaredNorm();
  };
  Vec2 k1q, k1p, k2q, k2p, k3q, k3p, k4q, k4p;
  const double s1 = deriv(ta, z.q, z.p, k1q, k1p);
  const double s2 = deriv(ta + h / 2, z.q + h / 2 * k1q, z.p + h / 2 * k1p, k2q, k2p);
  const double s3 = deriv(ta + h / 2, z.q + h / 2 * k2q, z.p + h / 2 * k2p, k3q, k3p);
  const double s4 = deriv(tb, z.q + h * k3q, z.p + h * k3p, k4q, k4p);
  PhasePoint out;
  out.q = z.q + h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
  out.p = z.p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
  out.action = z.action + h / 6.0 * (s1 + 2.0 * s2 + 2.0 * s3 + s4);
  return out;
}

ClassicalPath classical_flow_from(const PhasePoint& start, double t0, double t1, double dt, const ModelParams& p) {
  if (!(dt > 0.0)) throw DomainError("classical_flow: dt must be positive");
  const auto mesh = time_mesh(t0, t1, dt);
  ClassicalPath path;
  path.times = mesh;
  path.q.reserve(mesh.size());
  path.p.reserve(mesh.size());
  path.action.reserve(mesh.size());
  PhasePoint z = start;
  path.q.push_back(z.q);
  path.p.push_back(z.p);
  path.action.push_back(z.action);
  for (size_t i = 1; i < mesh.size(); ++i) {
    z = rk4_step(z, mesh[i - 1], mesh[i], p);
    path.q.push_back(z.q);
    path.p.push_back(z.p);
    path.action.push_back(z.action);
  }
  return path;
}

ClassicalPath classical_flow(const Vec2& v, double t0, double t1, double dt, const ModelParams& p) {
  PhasePoint z;
  z.p = v;
  return classical_flow_from(z, t0, t1, dt, p);
}

namespace {

// Fundamental matrix on a single piece; both endpoints in the same piece.
Mat2 piece_matrix(double t0, double t1, const ModelParams& p) {
  Mat2 m;
  const double mid = 0.5 * (t0 + t1);
  if (std::abs(mid) <= 1.0) {
    const double w = p.omega, d = t1 - t0;
    const double c = std::cosh(w * d), s = std::sinh(w * d);
    m << c, s / w, w * s, c;
    return m;
  }
  const double l = p.lambda;
  auto fund = [&](double t) {
    Mat2 f;
    if (t > 0) {
      f << std::pow(t, l), std::pow(t, 1.0 - l), l * std::pow(t, l - 1.0), (1.0 - l) * std::pow(t, -l);
    } else {
      const double u = -t;
      f << std::pow(u, l), std::pow(u, 1.0 - l), -l * std::pow(u, l - 1.0), -(1.0 - l) * std::pow(u, -l);
    }
    return f;
  };
  return fund(t1) * fund(t0).inverse();
}

}  // namespace

Mat2 flow_matrix(double t0, double t1, const ModelParams& p) {
  Mat2 m = Mat2::Identity();
  if (t0 == t1) return m;
  std::vector<double> pts{t0};
  const double lo = std::min(t0, t1), hi = std::max(t0, t1);
  std::vector<double> inner;
  for (double b : {-1.0, 1.0})
    if (b > lo && b < hi) inner.push_back(b);
  if (t1 < t0) std::reverse(inner.begin(), inner.end());
  for (double b : inner) pts.push_back(b);
  pts.push_back(t1);
  for (size_t i = 1; i < pts.size(); ++i) m = piece_matrix(pts[i - 1], pts[i], p) * m;
  return m;
}

namespace {

using boost::math::quadrature::gauss_kronrod;

struct LineIntegral {
  double value = 0.0;
  double error = 0.0;
  double tail = 0.0;
  double s_max = 0.0;
};

// Integral over s in [s_a, s_b] (s_b may be infinite) of V^reg(offset + s v) J(s).
template <class Jac>
LineIntegral integrate_along(const PotentialSpec& pot, const Vec2& v, const Vec2& offset, double s_a, double s_b,
                             Jac jac, double decay_exponent) {
  auto f = [&](double s) { return eval_v_reg(pot, offset + s * v) * jac(s); };
  const double vn = v.norm();
  std::vector<double> cuts{s_a};
  double last_window = s_a;
  for (const auto& t : pot.regular) {
    const double sc = (t.center - offset).dot(v) / (vn * vn);
    const double impact = (offset + sc * v - t.center).norm();
    const double half = t.kind == RegularKind::gaussian ? 10.0 * t.shape / vn : (1.0 + impact) / vn;
    for (double c : {sc - half, sc, sc + half}) {
      if (c > s_a && c < s_b) cuts.push_back(c);
    }
    last_window = std::max(last_window, std::min(sc + half, s_b));
  }
  LineIntegral out;
  double end = s_b;
  if (!std::isfinite(s_b)) {
    // Extend geometrically until the integrand falls below 1e-12 and stays there.
    double s = std::max(last_window, s_a) + 1.0;
    int quiet = 0;
    for (int k = 0; k < 200 && quiet < 3; ++k) {
      cuts.push_back(s);
      quiet = std::abs(f(s)) < 1e-12 ? quiet + 1 : 0;
      s = 2.0 * s;
    }
    end = cuts.back();
    if (quiet < 3) throw NumericalError("graf_phase: integrand does not decay below 1e-12");
    const double excess = decay_exponent - 1.0;
    if (!(excess > 0.0)) throw NumericalError("graf_phase: decay too slow for a finite tail (need lambda rho > 1)");
    out.tail = std::abs(f(end)) * end / excess;
  }
  cuts.push_back(end);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  for (size_t i = 1; i < cuts.size(); ++i) {
    double err = 0.0, l1 = 0.0;
    const double val = gauss_kronrod<double, 31>::integrate(f, cuts[i - 1], cuts[i], 12, 1e-13, &err, &l1);
    out.value += val;
    out.error += err;
  }
  out.s_max = end;
  return out;
}

}  // namespace

GrafResult graf_phase_detail(const Vec2& v, double t_end, const PotentialSpec& pot, const ModelParams& p,
                             const Vec2& offset) {
  GrafResult res;
  if (t_end == 0.0 || !pot.has_regular()) return res;
  if (v.norm() == 0.0) {
    const double val = eval_v_reg(pot, offset);
    if (val != 0.0 && !std::isfinite(t_end)) throw NumericalError("graf_phase: divergent integral at v = 0");
    res.phase = val * t_end;
    return res;
  }
  const double sgn = t_end < 0 ? -1.0 : 1.0;
  const Vec2 vv = sgn * v;
  const double T = std::abs(t_end);
  const double w = p.omega, l = p.lambda;
  // Inner piece in s = sinh(w tau)/w, dtau = ds / sqrt(1 + w^2 s^2).
  const double s1 = std::sinh(w * std::min(T, 1.0)) / w;
  auto jac_in = [w](double s) { return 1.0 / std::sqrt(1.0 + w * w * s * s); };
  LineIntegral a = integrate_along(pot, vv, offset, 0.0, s1, jac_in, 0.0);
  double value = a.value, error = a.error, tail = 0.0, trunc = T;
  if (T > 1.0) {
    // Outer piece in s = tau^l/(2l-1), dtau = (1/l) (2l-1)^{1/l} s^{1/l - 1} ds.
    const double c = std::pow(2.0 * l - 1.0, 1.0 / l) / l;
    auto jac_out = [c, l](double s) { return c * std::pow(s, 1.0 / l - 1.0); };
    const double sa = 1.0 / (2.0 * l - 1.0);
    const double sb = std::isfinite(T) ? std::pow(T, l) / (2.0 * l - 1.0) : kInfinity;
    double rho_decay = p.rho;
    for (const auto& t : pot.regular)
      if (t.kind == RegularKind::power_decay) rho_decay = std::min(rho_decay, t.shape);
    LineIntegral b = integrate_along(pot, vv, offset, sa, sb, jac_out, rho_decay + 1.0 - 1.0 / l);
    value += b.value;
    error += b.error;
    tail = b.tail;
    if (!std::isfinite(T)) trunc = std::pow((2.0 * l - 1.0) * b.s_max, 1.0 / l);
  }
  const double tol = 1e-10 * std::max(1.0, std::abs(value));
  if (!(error <= tol) || !std::isfinite(value)) {
    std::ostringstream os;
    os << "graf_phase: quadrature tolerance not reached (estimate " << error << ", tolerance " << tol << ")";
    throw NumericalError(os.str());
  }
  res.phase = sgn * value;
  res.error_estimate = error;
  res.tail_bound = tail;
  res.truncation_time = sgn * trunc;
  return res;
}

double graf_phase(const Vec2& v, double t_end, const PotentialSpec& pot, const ModelParams& p, const Vec2& offset) {
  return graf_phase_detail(v, t_end, pot, p, offset).phase;
}

double graf_phase_total(const Vec2& v, const PotentialSpec& pot, const ModelParams& p, const Vec2& offset) {
  return graf_phase(v, kInfinity, pot, p, offset) - graf_phase(v, -kInfinity, pot, p, offset);
}

}  // namespace qstomo
