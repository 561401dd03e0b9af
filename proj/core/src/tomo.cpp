#include "qstomo/tomo.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "qstomo/errors.hpp"
#include "qstomo/fft.hpp"
#include "qstomo/io.hpp"
#include "qstomo/parallel.hpp"

namespace qstomo {

using boost::math::quadrature::exp_sinh;
using boost::math::quadrature::gauss_kronrod;

FieldGrid FieldGrid::zeros(int n, double extent) {
  if (n < 2 || !(extent > 0.0)) throw ConfigError("FieldGrid: need n >= 2 and a positive extent");
  FieldGrid f;
  f.n = n;
  f.extent = extent;
  f.values.assign(static_cast<size_t>(n) * n, 0.0);
  return f;
}

FieldGrid sample_field(const std::function<double(const Vec2&)>& fn, int n, double extent) {
  FieldGrid f = FieldGrid::zeros(n, extent);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) f.at(i, j) = fn(Vec2(f.coord(i), f.coord(j)));
  return f;
}

double relative_l2(const FieldGrid& a, const FieldGrid& ref, double fraction) {
  if (a.n != ref.n || a.extent != ref.extent) throw ContractError("relative_l2: grids differ");
  const double lim = 0.5 * fraction * ref.extent + 1e-12;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < ref.n; ++i) {
    if (std::abs(ref.coord(i)) > lim) continue;
    for (int j = 0; j < ref.n; ++j) {
      if (std::abs(ref.coord(j)) > lim) continue;
      const double d = a.at(i, j) - ref.at(i, j);
      num += d * d;
      den += ref.at(i, j) * ref.at(i, j);
    }
  }
  if (den == 0.0) throw DomainError("relative_l2: reference vanishes on the window");
  return std::sqrt(num / den);
}

namespace {

struct Quad {
  double value = 0.0;
  double error = 0.0;
};

// Boost's tolerance is relative to the L1 norm, so nearly vanishing integrands would recurse to
// full depth; the depth cap keeps that bounded and callers check the absolute error.
Quad gk(const std::function<double(double)>& f, const std::vector<double>& cuts, double tol, unsigned depth = 8) {
  Quad q;
  for (size_t i = 1; i < cuts.size(); ++i) {
    if (!(cuts[i] > cuts[i - 1])) continue;
    double err = 0.0;
    q.value += gauss_kronrod<double, 31>::integrate(f, cuts[i - 1], cuts[i], depth, tol, &err);
    q.error += err;
  }
  return q;
}

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// int f(p0 + t u) dt with cuts around the term centres and exp-sinh tails when a term
// has infinite support.
Quad line_integral(const PotentialSpec& pot, const std::function<double(const Vec2&)>& f, const Vec2& p0,
                   const Vec2& u, double tol) {
  std::vector<double> cuts{0.0};
  bool tails = false;
  double lo = 0.0, hi = 0.0;
  auto window = [&](const Vec2& c, double half) {
    const double tc = (c - p0).dot(u);
    cuts.push_back(tc);
    cuts.push_back(tc - half);
    cuts.push_back(tc + half);
    lo = std::min(lo, tc - half);
    hi = std::max(hi, tc + half);
  };
  for (const auto& t : pot.regular) {
    if (t.kind == RegularKind::gaussian) {
      window(t.center, 14.0 * t.shape);
    } else {
      window(t.center, 10.0);
      tails = true;
    }
  }
  for (const auto& t : pot.singular) window(t.center, t.cutoff_radius);
  cuts = sorted_unique(cuts);
  std::vector<double> inside;
  for (double c : cuts)
    if (c >= lo && c <= hi) inside.push_back(c);
  auto g = [&](double t) { return f(p0 + t * u); };
  Quad q = gk(g, inside, tol);
  if (tails) {
    exp_sinh<double> es;
    double err = 0.0, l1 = 0.0;
    q.value += es.integrate([&](double s) { return g(hi + s); }, 0.0, std::numeric_limits<double>::infinity(),
                            tol, &err, &l1);
    q.error += err;
    q.value += es.integrate([&](double s) { return g(lo - s); }, 0.0, std::numeric_limits<double>::infinity(),
                            tol, &err, &l1);
    q.error += err;
  }
  return q;
}

}  // namespace

cplx oracle_rhs(const PotentialSpec& pot, const PacketSpec& phi0, const PacketSpec& psi0, const Vec2& v_hat,
                const Vec2& offset, const Vec2& e, const GridSpec&) {
  const Vec2 u = v_hat / v_hat.norm();
  const Vec2 nrm(-u[1], u[0]);
  const double w1 = phi0.width, w2 = psi0.width;
  auto packet = [](const PacketSpec& s, const Vec2& y) {
    const Vec2 d = y - s.center;
    return std::exp(-d.squaredNorm() / (2.0 * s.width * s.width)) / std::sqrt(kPi * s.width * s.width);
  };
  // Both packets are real, p_e g = i (e.(y-c)/w^2) g.
  auto w_reg = [&](const Vec2& y) { return packet(phi0, y) * packet(psi0, y); };
  auto w_sing = [&](const Vec2& y) {
    const double g1 = packet(phi0, y), g2 = packet(psi0, y);
    const double a1 = e.dot(y - phi0.center) / (w1 * w1), a2 = e.dot(y - psi0.center) / (w2 * w2);
    return (a1 + a2) * g1 * g2;  // imaginary part; the real part vanishes
  };
  const bool reg = pot.has_regular(), sing = !pot.singular.empty();
  if (!reg && !sing) return {0.0, 0.0};

  const double wmax = std::max(w1, w2);
  std::vector<double> bcuts, acuts;
  for (const auto* s : {&phi0, &psi0}) {
    const double bc = s->center.dot(nrm), ac = s->center.dot(u);
    bcuts.insert(bcuts.end(), {bc - 9.0 * wmax, bc, bc + 9.0 * wmax});
    acuts.insert(acuts.end(), {ac - 9.0 * wmax, ac, ac + 9.0 * wmax});
  }
  double blo = *std::min_element(bcuts.begin(), bcuts.end()), bhi = *std::max_element(bcuts.begin(), bcuts.end());
  for (const auto& t : pot.singular) bcuts.push_back((t.center - offset).dot(nrm));
  for (const auto& t : pot.regular) bcuts.push_back((t.center - offset).dot(nrm));
  std::vector<double> bin;
  for (double b : sorted_unique(bcuts))
    if (b >= blo && b <= bhi) bin.push_back(b);
  acuts = sorted_unique(acuts);

  const double tol = 1e-11;
  double inner_err = 0.0;
  const PotentialSpec preg = pot.regular_part();
  PotentialSpec psing;
  psing.singular = pot.singular;
  auto integrand = [&](double b) {
    double out = 0.0;
    const Vec2 p0 = offset + b * nrm;
    if (reg) {
      Quad m = gk([&](double a) { return w_reg(a * u + b * nrm); }, acuts, tol);
      if (m.value != 0.0) {
        Quad p = line_integral(preg, [&](const Vec2& x) { return e.dot(grad_v_reg(preg, x)); }, p0, u, tol);
        inner_err = std::max(inner_err, std::abs(p.error * m.value) + std::abs(p.value * m.error));
        out += p.value * m.value;
      }
    }
    if (sing) {
      Quad m = gk([&](double a) { return w_sing(a * u + b * nrm); }, acuts, tol);
      if (m.value != 0.0) {
        Quad q = line_integral(psing, [&](const Vec2& x) { return eval_v_sing(psing, x); }, p0, u, tol);
        inner_err = std::max(inner_err, std::abs(q.error * m.value) + std::abs(q.value * m.error));
        out += q.value * m.value;
      }
    }
    return out;
  };
  Quad total = gk(integrand, bin, 1e-10);
  const double err_total = total.error + inner_err * (bhi - blo);
  if (!(std::isfinite(total.value)) || err_total > 1e-8) {
    std::ostringstream os;
    os << "oracle_rhs: quadrature error estimate " << err_total << " exceeds 1e-8";
    throw NumericalError(os.str());
  }
  // Both weights carry one factor of i: (i dV) w_reg and (p_e Phi0) Psi0 - Phi0 p_e Psi0 = i w_sing.
  return cplx(0.0, total.value);
}

double xray_forward(const std::function<double(const Vec2&)>& f, double angle, double offset,
                    const XrayOptions& opts) {
  const Vec2 u(std::cos(angle), std::sin(angle)), nrm(-std::sin(angle), std::cos(angle));
  const double L = opts.half_length;
  std::vector<double> cuts{-L, 0.0, L};
  for (double b : opts.breakpoints)
    if (b > -L && b < L) cuts.push_back(b);
  cuts = sorted_unique(cuts);
  auto g = [&](double t) { return f(offset * nrm + t * u); };
  Quad q = gk(g, cuts, 1e-12, 12);
  exp_sinh<double> es;
  double err = 0.0, l1 = 0.0;
  q.value += es.integrate([&](double s) { return g(L + s); }, 0.0, std::numeric_limits<double>::infinity(), 1e-12,
                          &err, &l1);
  q.error += err;
  q.value += es.integrate([&](double s) { return g(-L - s); }, 0.0, std::numeric_limits<double>::infinity(), 1e-12,
                          &err, &l1);
  q.error += err;
  if (!std::isfinite(q.value) || q.error > 1e-10) {
    std::ostringstream os;
    os << "xray_forward: quadrature error estimate " << q.error << " exceeds 1e-10";
    throw NumericalError(os.str());
  }
  return q.value;
}

FieldGrid fbp_invert(const std::vector<double>& angles, const std::vector<double>& offsets,
                     const std::vector<double>& values, Filter filter, std::optional<double> deconvolve_width,
                     int n_out, double extent_out, int jobs) {
  const size_t M = angles.size(), K = offsets.size();
  if (M < 2 || K < 2) throw ConfigError("fbp_invert: need at least two angles and two offsets");
  if (values.size() != M * K) throw ContractError("fbp_invert: values must be angles x offsets");
  const double ds = (offsets.back() - offsets.front()) / static_cast<double>(K - 1);
  for (size_t k = 1; k < K; ++k)
    if (std::abs(offsets[k] - offsets[k - 1] - ds) > 1e-9 * std::abs(ds))
      throw ConfigError("fbp_invert: offsets must be uniformly spaced");
  if (!(ds > 0.0)) throw ConfigError("fbp_invert: offsets must increase");
  for (double v : values)
    if (!std::isfinite(v)) throw DomainError("fbp_invert: sinogram has non-finite values");

  int P = 1;
  while (P < static_cast<int>(2 * K)) P *= 2;
  CVec kernel(static_cast<size_t>(P), cplx(0.0, 0.0));
  for (int k = -static_cast<int>(K) + 1; k < static_cast<int>(K); ++k) {
    double h;
    if (filter == Filter::ram_lak) {
      h = k == 0 ? 1.0 / (4.0 * ds * ds) : (k % 2 == 0 ? 0.0 : -1.0 / (kPi * kPi * k * k * ds * ds));
    } else {
      h = -2.0 / (kPi * kPi * ds * ds * (4.0 * k * k - 1.0));
    }
    kernel[static_cast<size_t>((k + P) % P)] = h * ds;
  }
  fft::forward_1d(P, kernel.data());
  if (deconvolve_width) {
    const double w = *deconvolve_width;
    for (int m = 0; m < P; ++m) {
      const double nu = (m < P / 2 ? m : m - P) / (P * ds);
      const double g = std::exp(-kPi * kPi * w * w * nu * nu);
      kernel[static_cast<size_t>(m)] /= std::max(g, 0.05);
    }
  }
  std::vector<std::vector<double>> filtered(M, std::vector<double>(K));
  for (size_t a = 0; a < M; ++a) {
    CVec buf(static_cast<size_t>(P), cplx(0.0, 0.0));
    for (size_t k = 0; k < K; ++k) buf[k] = values[a * K + k];
    fft::forward_1d(P, buf.data());
    for (int m = 0; m < P; ++m) buf[static_cast<size_t>(m)] *= kernel[static_cast<size_t>(m)];
    fft::inverse_1d(P, buf.data());
    for (size_t k = 0; k < K; ++k) filtered[a][k] = buf[k].real();
  }
  FieldGrid out = FieldGrid::zeros(n_out, extent_out);
  std::vector<double> cs(M), sn(M);
  for (size_t a = 0; a < M; ++a) {
    cs[a] = std::cos(angles[a]);
    sn[a] = std::sin(angles[a]);
  }
  const double scale = kPi / static_cast<double>(M);
  parallel_for(n_out, resolve_jobs(jobs), [&](int i) {
    const double x1 = out.coord(i);
    for (int j = 0; j < n_out; ++j) {
      const double x2 = out.coord(j);
      double acc = 0.0;
      for (size_t a = 0; a < M; ++a) {
        const double s = -sn[a] * x1 + cs[a] * x2;
        const double r = (s - offsets.front()) / ds;
        if (r < 0.0 || r > static_cast<double>(K - 1)) continue;
        const size_t k0 = std::min(static_cast<size_t>(r), K - 2);
        const double f = r - static_cast<double>(k0);
        acc += (1.0 - f) * filtered[a][k0] + f * filtered[a][k0 + 1];
      }
      out.at(i, j) = scale * acc;
    }
  });
  return out;
}

FieldGrid potential_from_gradient(const FieldGrid& gx, const FieldGrid& gy) {
  if (gx.n != gy.n || gx.extent != gy.extent) throw ContractError("potential_from_gradient: grids differ");
  const int n = gx.n;
  if (n < 4 || (n & (n - 1)) != 0) throw ConfigError("potential_from_gradient: n must be a power of two");
  CVec a(static_cast<size_t>(n) * n), b(static_cast<size_t>(n) * n);
  for (size_t k = 0; k < a.size(); ++k) {
    a[k] = gx.values[k];
    b[k] = gy.values[k];
  }
  fft::forward_2d(n, a.data());
  fft::forward_2d(n, b.data());
  auto wn = [&](int i) { return 2.0 * kPi / gx.extent * (i < n / 2 ? i : i - n); };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const size_t k = static_cast<size_t>(i) * n + j;
      const double k1 = wn(i), k2 = wn(j), kk = k1 * k1 + k2 * k2;
      a[k] = kk == 0.0 ? cplx(0.0, 0.0) : -kI * (k1 * a[k] + k2 * b[k]) / kk;
    }
  fft::inverse_2d(n, a.data());
  FieldGrid v = FieldGrid::zeros(n, gx.extent);
  for (size_t k = 0; k < a.size(); ++k) v.values[k] = a[k].real();
  std::vector<double> ring;
  for (int i = 0; i < n; ++i) {
    ring.push_back(v.at(0, i));
    ring.push_back(v.at(i, 0));
    if (i > 0) {
      ring.push_back(v.at(n - 1, i));
      ring.push_back(v.at(i, n - 1));
    }
  }
  std::nth_element(ring.begin(), ring.begin() + ring.size() / 2, ring.end());
  const double med = ring[ring.size() / 2];
  for (double& x : v.values) x -= med;
  return v;
}

UniquenessReport uniqueness_demo(const PotentialSpec& v1, const PotentialSpec& v2, const SweepSpec& sweep,
                                 const ModelParams& params, const ScatterConfig& cfg, int jobs) {
  const Sinogram s1 = highv_sweep(sweep, v1, params, cfg, jobs);
  const Sinogram s2 = highv_sweep(sweep, v2, params, cfg, jobs);
  const Sinogram s0 = highv_sweep(sweep, PotentialSpec{}, params, cfg, jobs);
  UniquenessReport r;
  for (size_t k = 0; k < s1.cells.size(); ++k) {
    if (!s1.cells[k].ok || !s2.cells[k].ok || !s0.cells[k].ok)
      throw NumericalError("uniqueness_demo: a sweep cell failed");
    r.max_abs_diff = std::max(r.max_abs_diff, std::abs(s1.cells[k].value - s2.cells[k].value));
    r.noise_floor = std::max(r.noise_floor, std::abs(s0.cells[k].value));
  }
  r.distinguishable = r.max_abs_diff > 10.0 * r.noise_floor;
  return r;
}

void write_field(const std::string& base, const FieldGrid& f, const std::string& config_hash,
                 const std::string& quantity) {
  io::write_f64(base + ".bin", f.values);
  io::write_json(base + ".json", nlohmann::json{{"n", f.n},
                                                {"extent", f.extent},
                                                {"layout", "row-major float64 little-endian, index i*n+j at (x1_i, x2_j)"},
                                                {"x_min", f.coord(0)},
                                                {"h", f.h()},
                                                {"quantity", quantity},
                                                {"config_hash", config_hash}});
  const int stride = std::max(1, f.n / 128);
  std::string csv = "x1,x2,value\n";
  for (int i = 0; i < f.n; i += stride)
    for (int j = 0; j < f.n; j += stride)
      csv += io::fmt_double(f.coord(i)) + "," + io::fmt_double(f.coord(j)) + "," + io::fmt_double(f.at(i, j)) + "\n";
  io::write_text(base + ".csv", csv);
}

FieldGrid read_field(const std::string& base) {
  const auto meta = io::read_json(base + ".json");
  FieldGrid f = FieldGrid::zeros(meta.at("n").get<int>(), meta.at("extent").get<double>());
  f.values = io::read_f64(base + ".bin");
  if (f.values.size() != static_cast<size_t>(f.n) * f.n) throw IoError("field size does not match its sidecar", base);
  return f;
}

}  // namespace qstomo
