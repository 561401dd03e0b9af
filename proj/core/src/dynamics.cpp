#include "qstomo/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "qstomo/errors.hpp"
#include "qstomo/fft.hpp"
#include "qstomo/io.hpp"

namespace qstomo {

void validate(const EvolveConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw ConfigError("evolve: dt must be positive");
  if (cfg.strang_order != 2) throw ConfigError("evolve: only second-order Strang splitting is implemented");
  auto has = [&](double b) {
    return std::find(cfg.t_breakpoints.begin(), cfg.t_breakpoints.end(), b) != cfg.t_breakpoints.end();
  };
  if (!has(-1.0) || !has(1.0)) throw ConfigError("evolve: t_breakpoints must contain -1 and 1");
  if (!std::is_sorted(cfg.t_breakpoints.begin(), cfg.t_breakpoints.end()))
    throw ConfigError("evolve: t_breakpoints must be sorted");
}

namespace {

class Stepper {
 public:
  Stepper(WaveFunction& psi, const PotentialSpec& pot, const EvolveConfig& cfg)
      : psi_(psi), pot_(pot), cfg_(cfg), n_(psi.grid.n), y_(psi.grid.coords()), k_(psi.grid.wavenumbers()) {}

  // u <- exp(-i [w V(origin + scale y) - qc |y|^2/2]) u
  void kick(double w, double qc, const Vec2& origin, double scale, double smoothing = 0.0) {
    if (w == 0.0 && qc == 0.0) return;
    bool use_v = !pot_.empty() && w != 0.0;
    if (use_v) {
      sample_affine(pot_, origin, scale, y_, y_, v_, smoothing);
      if (cfg_.skip_tolerance > 0.0) {
        double m = 0.0;
        for (size_t i = 0; i < v_.size(); ++i) m = std::max(m, std::abs(v_[i]) * std::abs(psi_.env[i]));
        if (std::abs(w) * m < cfg_.skip_tolerance) use_v = false;
      }
    }
    if (!use_v) {
      if (qc == 0.0) return;
      row_.resize(n_);
      for (int i = 0; i < n_; ++i) row_[i] = std::polar(1.0, 0.5 * qc * y_[i] * y_[i]);
      for (int i = 0; i < n_; ++i) {
        cplx* r = psi_.env.data() + static_cast<size_t>(i) * n_;
        for (int j = 0; j < n_; ++j) r[j] *= row_[i] * row_[j];
      }
      return;
    }
    for (int i = 0; i < n_; ++i) {
      cplx* r = psi_.env.data() + static_cast<size_t>(i) * n_;
      const double* vr = v_.data() + static_cast<size_t>(i) * n_;
      const double yi2 = y_[i] * y_[i];
      for (int j = 0; j < n_; ++j) r[j] *= std::polar(1.0, -(w * vr[j] - 0.5 * qc * (yi2 + y_[j] * y_[j])));
    }
  }

  void free(double tau) { envelope_free_step(psi_, tau); }

 private:
  WaveFunction& psi_;
  const PotentialSpec& pot_;
  const EvolveConfig& cfg_;
  int n_;
  std::vector<double> y_, k_, v_;
  std::vector<cplx> row_;
};

struct Dumper {
  std::optional<std::ofstream> out;
  int every = 0;
  explicit Dumper(const EvolveConfig& cfg) : every(cfg.dump_every) {
    if (every > 0 && !cfg.dump_path.empty()) {
      out.emplace(cfg.dump_path, std::ios::trunc);
      if (!*out) throw IoError("cannot open trajectory dump", cfg.dump_path);
      *out << "t,q1,q2,p1,p2,S,norm\n";
    }
  }
  void row(long step, double t, const Frame& f, const WaveFunction& psi, bool last) {
    if (!out || (step % every != 0 && !last)) return;
    *out << io::fmt_double(t) << ',' << io::fmt_double(f.q[0]) << ',' << io::fmt_double(f.q[1]) << ','
         << io::fmt_double(f.p[0]) << ',' << io::fmt_double(f.p[1]) << ',' << io::fmt_double(f.phase) << ','
         << io::fmt_double(norm(psi)) << '\n';
  }
};

void check_band(const WaveFunction& psi, double t, const EvolveConfig& cfg) {
  const double b = boundary_band_fraction(psi);
  if (b > cfg.band_tolerance) {
    std::ostringstream os;
    os << "evolve: envelope reached the boundary band at t = " << t << " (mass fraction " << b << ")";
    throw AliasingError(os.str(), t, b);
  }
}

WaveFunction evolve_comoving(const WaveFunction& in, double t0, double t1, const PotentialSpec& pot,
                             const ModelParams& params, const EvolveConfig& cfg) {
  if (in.frame.scale != 1.0 || in.frame.chirp != 0.0)
    throw ContractError("evolve: comoving mode needs scale 1 and no chirp (resample first)");
  WaveFunction psi = in;
  const auto mesh = time_mesh(t0, t1, cfg.dt, cfg.t_breakpoints);
  Stepper st(psi, pot, cfg);
  Dumper dump(cfg);
  PhasePoint z{psi.frame.q, psi.frame.p, psi.frame.phase};
  const size_t m = mesh.size() - 1;
  dump.row(0, t0, psi.frame, psi, m == 0);
  if (m == 0) return psi;
  // Adjacent half kicks at a shared node are merged into one multiplication.
  double h0 = mesh[1] - mesh[0];
  st.kick(0.5 * h0, 0.5 * h0 * k_on_step(mesh[0], mesh[0], mesh[1], params), z.q, 1.0);
  for (size_t i = 0; i < m; ++i) {
    const double ta = mesh[i], tb = mesh[i + 1], h = tb - ta;
    st.free(h);
    z = rk4_step(z, ta, tb, params);
    double w = 0.5 * h, qc = 0.5 * h * k_on_step(tb, ta, tb, params);
    if (i + 1 < m) {
      const double tc = mesh[i + 2], h2 = tc - tb;
      w += 0.5 * h2;
      qc += 0.5 * h2 * k_on_step(tb, tb, tc, params);
    }
    st.kick(w, qc, z.q, 1.0);
    psi.frame.q = z.q;
    psi.frame.p = z.p;
    psi.frame.phase = z.action;
    const bool last = i + 1 == m;
    dump.row(static_cast<long>(i + 1), tb, psi.frame, psi, last);
    if (last || (cfg.band_check_every > 0 && (i + 1) % cfg.band_check_every == 0)) check_band(psi, tb, cfg);
  }
  return psi;
}

struct LensState {
  Vec2 q, p;
  double phase, scale, chirp, tau;
};

LensState lens_at(const Frame& f0, const Mat2& lens0, double t0, double t, const ModelParams& params) {
  const Mat2 m = flow_matrix(t0, t, params);
  const Mat2 nm = m * lens0;
  LensState s;
  s.q = m(0, 0) * f0.q + m(0, 1) * f0.p;
  s.p = m(1, 0) * f0.q + m(1, 1) * f0.p;
  s.phase = f0.phase + 0.5 * (s.p.dot(s.q) - f0.p.dot(f0.q));
  if (!(nm(0, 0) > 0.0)) throw DomainError("evolve: lens frame reached a focus; use a shorter window");
  s.scale = nm(0, 0);
  s.chirp = nm(1, 0) / nm(0, 0);
  s.tau = nm(0, 1) / nm(0, 0);
  return s;
}

WaveFunction evolve_lens(const WaveFunction& in, double t0, double t1, const PotentialSpec& pot,
                         const ModelParams& params, const EvolveConfig& cfg) {
  WaveFunction psi = in;
  const Frame f0 = in.frame;
  Mat2 lens0;
  lens0 << f0.scale, 0.0, f0.chirp * f0.scale, 1.0 / f0.scale;
  const auto mesh = time_mesh(t0, t1, cfg.dt, cfg.t_breakpoints);
  Stepper st(psi, pot, cfg);
  Dumper dump(cfg);
  const size_t m = mesh.size() - 1;
  dump.row(0, t0, psi.frame, psi, m == 0);
  if (m == 0) return psi;
  LensState a = lens_at(f0, lens0, t0, mesh[0], params);
  const double hy = psi.grid.h();
  auto smooth = [&](double scale) { return cfg.potential_smoothing * hy * std::max(0.0, scale - 1.0); };
  st.kick(0.5 * (mesh[1] - mesh[0]), 0.0, a.q, a.scale, smooth(a.scale));
  for (size_t i = 0; i < m; ++i) {
    const double tb = mesh[i + 1], h = tb - mesh[i];
    LensState b = lens_at(f0, lens0, t0, tb, params);
    st.free(b.tau - a.tau);
    double w = 0.5 * h;
    if (i + 1 < m) w += 0.5 * (mesh[i + 2] - tb);
    st.kick(w, 0.0, b.q, b.scale, smooth(b.scale));
    psi.frame = Frame{b.q, b.p, b.phase, b.scale, b.chirp};
    a = b;
    const bool last = i + 1 == m;
    dump.row(static_cast<long>(i + 1), tb, psi.frame, psi, last);
    if (last || (cfg.band_check_every > 0 && (i + 1) % cfg.band_check_every == 0)) check_band(psi, tb, cfg);
  }
  return psi;
}

}  // namespace

WaveFunction evolve(const WaveFunction& psi, double t0, double t1, const PotentialSpec& pot, const ModelParams& params,
                    const EvolveConfig& cfg) {
  validate(cfg);
  check_band(psi, t0, cfg);
  if (cfg.mode == FrameMode::comoving) return evolve_comoving(psi, t0, t1, pot, params, cfg);
  return evolve_lens(psi, t0, t1, pot, params, cfg);
}

ConvergenceReport convergence_probe(const WaveFunction& psi, double t0, double t1, const PotentialSpec& pot,
                                    const ModelParams& params, const EvolveConfig& cfg) {
  EvolveConfig c = cfg;
  c.dump_every = 0;
  const auto a = evolve(psi, t0, t1, pot, params, c);
  c.dt = cfg.dt / 2;
  const auto b = evolve(psi, t0, t1, pot, params, c);
  c.dt = cfg.dt / 4;
  const auto d = evolve(psi, t0, t1, pot, params, c);
  ConvergenceReport r;
  // Frames agree to the RK4 error only, so compare in a common frame.
  r.err_dt = l2_distance(a, snap_frame(b, a.frame));
  r.err_dt_half = l2_distance(b, snap_frame(d, b.frame));
  r.order_estimate = r.err_dt_half > 0.0 ? std::log2(r.err_dt / r.err_dt_half) : 0.0;
  return r;
}

}  // namespace qstomo
