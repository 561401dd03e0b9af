#include "qstomo/field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qstomo/errors.hpp"
#include "qstomo/fft.hpp"
#include "qstomo/io.hpp"

namespace qstomo {

GridSpec GridSpec::make(int n, double extent) {
  if (n < 4 || (n & (n - 1)) != 0) throw ConfigError("grid: n_points must be a power of two >= 4");
  if (!(extent > 0.0)) throw ConfigError("grid: extent must be positive");
  return GridSpec{n, extent};
}

std::vector<double> GridSpec::coords() const {
  std::vector<double> c(n);
  for (int i = 0; i < n; ++i) c[i] = coord(i);
  return c;
}

std::vector<double> GridSpec::wavenumbers() const {
  std::vector<double> k(n);
  for (int i = 0; i < n; ++i) k[i] = wavenumber(i);
  return k;
}

Frame Frame::compose(const Frame& g) const {
  Frame h;
  const Vec2 d = scale * g.q;
  h.q = q + d;
  h.scale = scale * g.scale;
  h.phase = phase + g.phase + p.dot(d) + 0.5 * chirp * d.squaredNorm();
  h.p = p + chirp * d + g.p / scale;
  h.chirp = chirp + g.chirp / (scale * scale);
  return h;
}

namespace {

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)}); }

bool close(const Vec2& a, const Vec2& b, double tol) { return close(a[0], b[0], tol) && close(a[1], b[1], tol); }

void require_same_grid(const WaveFunction& a, const WaveFunction& b, const char* what) {
  if (!(a.grid == b.grid)) throw ContractError(std::string(what) + ": grids differ");
  if (!a.frame.same_geometry(b.frame))
    throw ContractError(std::string(what) + ": frames differ (inner products need identical q, p, scale, chirp)");
}

CVec spectrum(const WaveFunction& psi) {
  CVec s = psi.env;
  fft::forward_2d(psi.grid.n, s.data());
  return s;
}

}  // namespace

bool Frame::same_geometry(const Frame& o, double tol) const {
  return close(q, o.q, tol) && close(p, o.p, tol) && close(scale, o.scale, tol) && close(chirp, o.chirp, tol);
}

bool Frame::approx_equal(const Frame& o, double tol) const { return same_geometry(o, tol) && close(phase, o.phase, tol); }

WaveFunction gaussian_packet(const GridSpec& grid, double width, const Vec2& center, const Vec2& boost) {
  if (!(width >= 4.0 * grid.h() && width <= grid.extent / 8.0)) {
    std::ostringstream os;
    os << "gaussian_packet: width " << width << " not resolvable (need " << 4.0 * grid.h() << " <= w <= "
       << grid.extent / 8.0 << ")";
    throw ConfigError(os.str());
  }
  Frame f;
  f.p = boost;
  WaveFunction psi(grid, f);
  const double c = 1.0 / std::sqrt(kPi * width * width);
  const double a = 1.0 / (2.0 * width * width);
  std::vector<double> g1(grid.n), g2(grid.n);
  for (int i = 0; i < grid.n; ++i) {
    const double d1 = grid.coord(i) - center[0], d2 = grid.coord(i) - center[1];
    g1[i] = std::exp(-a * d1 * d1);
    g2[i] = std::exp(-a * d2 * d2);
  }
  for (int i = 0; i < grid.n; ++i)
    for (int j = 0; j < grid.n; ++j) psi.at(i, j) = c * g1[i] * g2[j];
  return psi;
}

WaveFunction momentum_bump_packet(const GridSpec& grid, double kmax, const Vec2& center, const Vec2& boost) {
  if (!(kmax > 0.0 && kmax < 0.8 * kPi / grid.h()))
    throw ConfigError("momentum_bump_packet: kmax must lie below the grid Nyquist wavenumber");
  Frame f;
  f.p = boost;
  WaveFunction psi(grid, f);
  const auto k = grid.wavenumbers();
  const double x0 = grid.coord(0);
  for (int i = 0; i < grid.n; ++i)
    for (int j = 0; j < grid.n; ++j) {
      const double r2 = (k[i] * k[i] + k[j] * k[j]) / (kmax * kmax);
      if (r2 >= 1.0) {
        psi.at(i, j) = 0.0;
        continue;
      }
      // Shift so the envelope is centred at `center` on a grid starting at x0.
      const double ph = -(k[i] * (center[0] - x0) + k[j] * (center[1] - x0));
      psi.at(i, j) = std::exp(1.0 - 1.0 / (1.0 - r2)) * std::polar(1.0, ph);
    }
  fft::inverse_2d(grid.n, psi.env.data());
  const double nn = norm(psi);
  for (auto& z : psi.env) z /= nn;
  return psi;
}

double norm2(const WaveFunction& a) {
  double s = 0.0;
  for (const auto& z : a.env) s += std::norm(z);
  const double h = a.grid.h();
  return s * h * h;
}

double norm(const WaveFunction& a) { return std::sqrt(norm2(a)); }

cplx inner(const WaveFunction& a, const WaveFunction& b) {
  require_same_grid(a, b, "inner");
  cplx s = 0.0;
  for (size_t i = 0; i < a.env.size(); ++i) s += std::conj(a.env[i]) * b.env[i];
  const double h = a.grid.h();
  return s * (h * h) * std::polar(1.0, b.frame.phase - a.frame.phase);
}

cplx pair(const WaveFunction& f, const WaveFunction& g) { return inner(g, f); }

double l2_distance(const WaveFunction& a, const WaveFunction& b) {
  require_same_grid(a, b, "l2_distance");
  const cplx pa = std::polar(1.0, a.frame.phase), pb = std::polar(1.0, b.frame.phase);
  double s = 0.0;
  for (size_t i = 0; i < a.env.size(); ++i) s += std::norm(pa * a.env[i] - pb * b.env[i]);
  const double h = a.grid.h();
  return std::sqrt(s) * h;
}

WaveFunction axpy(cplx alpha, const WaveFunction& x, const WaveFunction& y) {
  require_same_grid(x, y, "axpy");
  WaveFunction out = y;
  const cplx rel = alpha * std::polar(1.0, x.frame.phase - y.frame.phase);
  for (size_t i = 0; i < out.env.size(); ++i) out.env[i] += rel * x.env[i];
  return out;
}

WaveFunction apply_rel_momentum_dir(const WaveFunction& psi, const Vec2& e) {
  const int n = psi.grid.n;
  const auto k = psi.grid.wavenumbers();
  const auto y = psi.grid.coords();
  const double s = psi.frame.scale;
  WaveFunction out = psi;
  auto spec = spectrum(psi);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) spec[static_cast<size_t>(i) * n + j] *= (e[0] * k[i] + e[1] * k[j]) / s;
  fft::inverse_2d(n, spec.data());
  out.env = std::move(spec);
  if (psi.frame.chirp != 0.0) {
    const double c = psi.frame.chirp * s;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out.at(i, j) += c * (e[0] * y[i] + e[1] * y[j]) * psi.at(i, j);
  }
  return out;
}

WaveFunction apply_rel_momentum(const WaveFunction& psi, int j) {
  if (j != 0 && j != 1) throw DomainError("apply_rel_momentum: axis must be 0 or 1");
  return apply_rel_momentum_dir(psi, j == 0 ? Vec2(1, 0) : Vec2(0, 1));
}

WaveFunction chirp_multiply(const WaveFunction& psi, double a) {
  WaveFunction out = psi;
  if (a == 0.0) return out;
  Frame& f = out.frame;
  f.phase += 0.5 * a * f.q.squaredNorm();
  f.p += a * f.q;
  f.chirp += a;
  return out;
}

WaveFunction dilate(const WaveFunction& psi, double theta) {
  WaveFunction out = psi;
  if (theta == 0.0) return out;
  const double e = std::exp(theta);
  Frame& f = out.frame;
  f.q /= e;
  f.p *= e;
  f.scale /= e;
  f.chirp *= e * e;
  return out;
}

WaveFunction phase_shift(const WaveFunction& psi, double phi) {
  WaveFunction out = psi;
  out.frame.phase += phi;
  return out;
}

void envelope_free_step(WaveFunction& psi, double tau) {
  if (tau == 0.0) return;
  const int n = psi.grid.n;
  std::vector<cplx> m(n);
  for (int i = 0; i < n; ++i) {
    const double k = psi.grid.wavenumber(i);
    m[i] = std::polar(1.0, -0.5 * tau * k * k);
  }
  fft::forward_2d(n, psi.env.data());
  for (int i = 0; i < n; ++i) {
    cplx* row = psi.env.data() + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) row[j] *= m[i] * m[j];
  }
  fft::inverse_2d(n, psi.env.data());
}

void envelope_parity(WaveFunction& psi) {
  const int n = psi.grid.n;
  CVec out(psi.env.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[static_cast<size_t>((n - i) % n) * n + (n - j) % n] = psi.at(i, j);
  psi.env = std::move(out);
}

WaveFunction apply_symplectic(const WaveFunction& psi, const Mat2& m) {
  WaveFunction out = psi;
  const Frame& f = psi.frame;
  Frame& g = out.frame;
  g.q = m(0, 0) * f.q + m(0, 1) * f.p;
  g.p = m(1, 0) * f.q + m(1, 1) * f.p;
  g.phase = f.phase + 0.5 * (g.p.dot(g.q) - f.p.dot(f.q));
  Mat2 lens;
  lens << f.scale, 0.0, f.chirp * f.scale, 1.0 / f.scale;
  const Mat2 nm = m * lens;
  const double a = nm(0, 0);
  if (std::abs(a) <= 1e-14 * nm.cwiseAbs().maxCoeff())
    throw DomainError("apply_symplectic: exact focus, the envelope collapses to a point");
  g.scale = std::abs(a);
  g.chirp = nm(1, 0) / a;
  envelope_free_step(out, nm(0, 1) / a);
  if (a < 0.0) {
    // Past a focus: u(-y), with the two-dimensional Gouy factor -1.
    envelope_parity(out);
    g.phase += kPi;
  }
  return out;
}

WaveFunction free_step(const WaveFunction& psi, double tau) {
  if (tau == 0.0) return psi;
  Mat2 m;
  m << 1.0, tau, 0.0, 1.0;
  return apply_symplectic(psi, m);
}

WaveFunction materialize_chirp(const WaveFunction& psi) {
  WaveFunction out = psi;
  if (psi.frame.chirp == 0.0) return out;
  const int n = psi.grid.n;
  const double c = 0.5 * psi.frame.chirp * psi.frame.scale * psi.frame.scale;
  std::vector<cplx> m(n);
  for (int i = 0; i < n; ++i) {
    const double y = psi.grid.coord(i);
    m[i] = std::polar(1.0, c * y * y);
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.at(i, j) *= m[i] * m[j];
  out.frame.chirp = 0.0;
  return out;
}

namespace {

using RMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Periodic trigonometric interpolation weights of the source grid at the given points,
// zero for points outside the source cell.
RMat interp_matrix(const GridSpec& src, const std::vector<double>& pts) {
  const int n = src.n;
  const double L = src.extent;
  RMat k = RMat::Zero(static_cast<long>(pts.size()), n);
  for (size_t i = 0; i < pts.size(); ++i) {
    const double y = pts[i];
    if (!(y >= -0.5 * L && y < 0.5 * L)) continue;
    for (int j = 0; j < n; ++j) {
      const double th = 2.0 * kPi * (y - src.coord(j)) / L;
      const double half = 0.5 * th;
      double w;
      if (std::abs(std::sin(half)) < 1e-13)
        w = 1.0;
      else
        w = std::sin(n * half) / (n * std::tan(half));
      k(static_cast<long>(i), j) = w;
    }
  }
  return k;
}

}  // namespace

WaveFunction reframe(const WaveFunction& psi, const GridSpec& target, const Frame& tf, double tol) {
  const Frame& sf = psi.frame;
  const GridSpec& sg = psi.grid;
  if (!(tf.scale > 0.0)) throw DomainError("reframe: target scale must be positive");
  // Source mass that falls outside the target window is lost.
  {
    double lost = 0.0, total = 0.0;
    for (int i = 0; i < sg.n; ++i) {
      const double y1 = (sf.q[0] + sf.scale * sg.coord(i) - tf.q[0]) / tf.scale;
      const bool in1 = y1 >= -0.5 * target.extent && y1 < 0.5 * target.extent;
      for (int j = 0; j < sg.n; ++j) {
        const double m = std::norm(psi.at(i, j));
        total += m;
        const double y2 = (sf.q[1] + sf.scale * sg.coord(j) - tf.q[1]) / tf.scale;
        if (!(in1 && y2 >= -0.5 * target.extent && y2 < 0.5 * target.extent)) lost += m;
      }
    }
    if (total > 0.0 && lost / total > tol) {
      std::ostringstream os;
      os << "reframe: envelope support exceeds the target window (lost mass fraction " << lost / total << ")";
      throw AliasingError(os.str(), 0.0, lost / total);
    }
  }
  const int nt = target.n;
  std::vector<double> xs[2], ys[2];
  RMat k[2];
  for (int a = 0; a < 2; ++a) {
    xs[a].resize(nt);
    ys[a].resize(nt);
    for (int i = 0; i < nt; ++i) {
      xs[a][i] = tf.q[a] + tf.scale * target.coord(i);
      ys[a][i] = (xs[a][i] - sf.q[a]) / sf.scale;
    }
    k[a] = interp_matrix(sg, ys[a]);
  }
  Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> u(psi.env.data(), sg.n,
                                                                                           sg.n);
  const RMat ur = u.real(), ui = u.imag();
  const RMat tr = k[0] * ur * k[1].transpose();
  const RMat ti = k[0] * ui * k[1].transpose();
  WaveFunction out(target, tf);
  std::vector<cplx> ph[2];
  for (int a = 0; a < 2; ++a) {
    ph[a].resize(nt);
    for (int i = 0; i < nt; ++i) {
      const double ds = xs[a][i] - sf.q[a], dt = xs[a][i] - tf.q[a];
      const double phi = sf.p[a] * ds + 0.5 * sf.chirp * ds * ds - tf.p[a] * dt - 0.5 * tf.chirp * dt * dt;
      ph[a][i] = std::polar(1.0, phi);
    }
  }
  const cplx c = std::polar(tf.scale / sf.scale, sf.phase - tf.phase);
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < nt; ++j) out.at(i, j) = c * ph[0][i] * ph[1][j] * cplx(tr(i, j), ti(i, j));
  out.frame.phase = tf.phase;
  const double sb = spectral_band_fraction(out);
  if (sb > tol) {
    std::ostringstream os;
    os << "reframe: target grid does not resolve the state (spectral band fraction " << sb << ")";
    throw AliasingError(os.str(), 0.0, sb);
  }
  return out;
}

WaveFunction resample_to_unit_scale(const WaveFunction& psi, double tol) {
  if (!(psi.frame.scale > 0.0)) throw DomainError("resample_to_unit_scale: scale must be positive");
  if (psi.frame.scale == 1.0 && psi.frame.chirp == 0.0) return psi;
  if (psi.frame.scale == 1.0) return materialize_chirp(psi);
  Frame tf = psi.frame;
  tf.scale = 1.0;
  tf.chirp = 0.0;
  return reframe(psi, psi.grid, tf, tol);
}

WaveFunction to_physical(const WaveFunction& psi, const GridSpec& target, double tol) {
  return reframe(psi, target, Frame::identity(), tol);
}

WaveFunction snap_frame(const WaveFunction& psi, const Frame& t, double tol) {
  const Frame& f = psi.frame;
  if (!f.same_geometry(t, tol)) {
    std::ostringstream os;
    os << "snap_frame: frames differ beyond rounding (q " << (f.q - t.q).norm() << ", p " << (f.p - t.p).norm()
       << ", scale " << f.scale - t.scale << ", chirp " << f.chirp - t.chirp << ")";
    throw ContractError(os.str());
  }
  WaveFunction out = psi;
  const int n = psi.grid.n;
  const double s = f.scale;
  const Vec2 dp = f.p - t.p;
  const double db = f.chirp - t.chirp;
  std::vector<cplx> m[2];
  for (int a = 0; a < 2; ++a) {
    m[a].resize(n);
    for (int i = 0; i < n; ++i) {
      const double y = psi.grid.coord(i);
      m[a][i] = std::polar(1.0, dp[a] * s * y + 0.5 * db * s * s * y * y);
    }
  }
  const cplx c = std::polar(1.0, f.phase - t.phase);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.at(i, j) *= c * m[0][i] * m[1][j];
  out.frame = t;
  return out;
}

Moments moments(const WaveFunction& psi) {
  const int n = psi.grid.n;
  const auto y = psi.grid.coords();
  const auto k = psi.grid.wavenumbers();
  Moments mo;
  double tot = 0.0;
  Vec2 my = Vec2::Zero(), myy = Vec2::Zero();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double w = std::norm(psi.at(i, j));
      tot += w;
      my += w * Vec2(y[i], y[j]);
      myy += w * Vec2(y[i] * y[i], y[j] * y[j]);
    }
  const double h = psi.grid.h();
  mo.norm = tot * h * h;
  my /= tot;
  myy /= tot;
  const auto spec = spectrum(psi);
  double stot = 0.0;
  Vec2 mk = Vec2::Zero(), mkk = Vec2::Zero();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double w = std::norm(spec[static_cast<size_t>(i) * n + j]);
      stot += w;
      mk += w * Vec2(k[i], k[j]);
      mkk += w * Vec2(k[i] * k[i], k[j] * k[j]);
    }
  mk /= stot;
  mkk /= stot;
  // Symmetrized <y xi> = Re <u, y (xi u)>.
  Vec2 myk = Vec2::Zero();
  for (int a = 0; a < 2; ++a) {
    WaveFunction base = psi;
    base.frame = Frame::identity();
    const auto du = apply_rel_momentum(base, a);
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += (y[a == 0 ? i : j] * std::conj(psi.at(i, j)) * du.at(i, j)).real();
    myk[a] = s / tot;
  }
  const Frame& f = psi.frame;
  const double sc = f.scale, b = f.chirp;
  for (int a = 0; a < 2; ++a) {
    const double vy = myy[a] - my[a] * my[a];
    const double vk = mkk[a] - mk[a] * mk[a];
    const double cyk = myk[a] - my[a] * mk[a];
    mo.mean_x[a] = f.q[a] + sc * my[a];
    mo.mean_p[a] = f.p[a] + b * sc * my[a] + mk[a] / sc;
    mo.var_x[a] = sc * sc * vy;
    mo.var_p[a] = b * b * sc * sc * vy + vk / (sc * sc) + 2.0 * b * cyk;
    mo.cov_xp[a] = b * sc * sc * vy + cyk;
  }
  return mo;
}

namespace {

int band_width(int n) { return std::max(1, static_cast<int>(std::ceil(0.02 * n))); }

}  // namespace

double boundary_band_fraction(const WaveFunction& psi) {
  const int n = psi.grid.n, b = band_width(n);
  double tot = 0.0, band = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double w = std::norm(psi.at(i, j));
      tot += w;
      if (i < b || i >= n - b || j < b || j >= n - b) band += w;
    }
  return tot > 0.0 ? band / tot : 0.0;
}

double spectral_band_fraction(const WaveFunction& psi) {
  const int n = psi.grid.n, b = band_width(n);
  const auto spec = spectrum(psi);
  double tot = 0.0, band = 0.0;
  auto outer = [&](int i) {
    const int m = i < n / 2 ? i : n - i;
    return m > n / 2 - b;
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double w = std::norm(spec[static_cast<size_t>(i) * n + j]);
      tot += w;
      if (outer(i) || outer(j)) band += w;
    }
  return tot > 0.0 ? band / tot : 0.0;
}

nlohmann::json to_json(const Frame& f) {
  return {{"q", {f.q[0], f.q[1]}}, {"p", {f.p[0], f.p[1]}}, {"S", f.phase}, {"scale", f.scale}, {"chirp", f.chirp}};
}

Frame frame_from_json(const nlohmann::json& j) {
  Frame f;
  try {
    f.q = Vec2(j.at("q").at(0).get<double>(), j.at("q").at(1).get<double>());
    f.p = Vec2(j.at("p").at(0).get<double>(), j.at("p").at(1).get<double>());
    f.phase = j.at("S").get<double>();
    f.scale = j.at("scale").get<double>();
    f.chirp = j.value("chirp", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("frame: ") + e.what());
  }
  return f;
}

void write_wavefunction(const std::string& base, const WaveFunction& psi, const std::string& config_hash) {
  std::vector<double> v(psi.env.size() * 2);
  for (size_t i = 0; i < psi.env.size(); ++i) {
    v[2 * i] = psi.env[i].real();
    v[2 * i + 1] = psi.env[i].imag();
  }
  io::write_f64(base + ".bin", v);
  nlohmann::json side{{"n_points", psi.grid.n},
                      {"extent", psi.grid.extent},
                      {"frame", to_json(psi.frame)},
                      {"format", "complex128-le-rowmajor"},
                      {"config_hash", config_hash}};
  io::write_json(base + ".json", side);
}

WaveFunction read_wavefunction(const std::string& base) {
  const auto side = io::read_json(base + ".json");
  GridSpec g;
  Frame f;
  try {
    g = GridSpec::make(side.at("n_points").get<int>(), side.at("extent").get<double>());
    f = frame_from_json(side.at("frame"));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw IoError(std::string("corrupt sidecar (") + e.what() + ")", base + ".json");
  }
  const auto v = io::read_f64(base + ".bin");
  if (v.size() != static_cast<size_t>(g.size()) * 2) throw IoError("binary size does not match sidecar", base + ".bin");
  WaveFunction psi(g, f);
  for (size_t i = 0; i < psi.env.size(); ++i) psi.env[i] = cplx(v[2 * i], v[2 * i + 1]);
  return psi;
}

}  // namespace qstomo
