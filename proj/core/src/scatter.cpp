#include "qstomo/scatter.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "qstomo/io.hpp"
#include "qstomo/parallel.hpp"
#include "qstomo/tomo.hpp"

namespace qstomo {

EvolveConfig ScatterConfig::evolve_config() const {
  EvolveConfig e;
  e.dt = dt;
  e.tolerance = tolerance;
  e.mode = mode;
  e.skip_tolerance = skip_tolerance;
  e.band_tolerance = band_tolerance;
  e.potential_smoothing = potential_smoothing;
  return e;
}

void validate(const ScatterConfig& c) {
  if (!(c.T > 1.0)) throw ConfigError("scatter: T must exceed 1 (the U0,lambda branch needs |T| > 1)");
  if (!(c.dt > 0.0)) throw ConfigError("scatter: dt must be positive");
  if (!(c.tolerance > 0.0)) throw ConfigError("scatter: tolerance must be positive");
  GridSpec::make(c.grid.n, c.grid.extent);
}

WaveFunction boosted_packet(const GridSpec& grid, const PacketSpec& spec, const Vec2& v, const Vec2& offset) {
  WaveFunction psi = gaussian_packet(grid, spec.width, spec.center, v);
  psi.frame.q = offset;
  psi.frame.phase = v.dot(offset);
  return psi;
}

namespace {

WaveFunction s_lambda_at(const WaveFunction& phi, double T, const PotentialSpec& pot, const ModelParams& params,
                         const ScatterConfig& cfg) {
  const auto ecfg = cfg.evolve_config();
  WaveFunction psi = apply(comparison_factorization(-T, params, cfg.comparison), phi);
  if (cfg.mode == FrameMode::comoving) psi = resample_to_unit_scale(psi);
  psi = evolve(psi, -T, T, pot, params, ecfg);
  psi = apply(comparison_factorization(T, params, cfg.comparison).adjoint(), psi);
  if (cfg.mode == FrameMode::comoving) return reframe(psi, phi.grid, phi.frame);
  // The round trip passes through frames of size |M(-T, T)|, so the returned geometry only
  // matches to rounding amplified by the square of that.
  const double cond = flow_matrix(-T, T, params).squaredNorm();
  return snap_frame(psi, phi.frame, std::max(1e-10, 10.0 * cond * std::numeric_limits<double>::epsilon()));
}

}  // namespace

WaveFunction s_lambda_apply(const WaveFunction& phi, const PotentialSpec& pot, const ModelParams& params,
                            const ScatterConfig& cfg) {
  validate(cfg);
  return s_lambda_at(phi, cfg.T, pot, params, cfg);
}

WaveFunction s_lambda_apply_checked(const WaveFunction& phi, const PotentialSpec& pot, const ModelParams& params,
                                    const ScatterConfig& cfg, double* horizon_change) {
  validate(cfg);
  WaveFunction a = s_lambda_at(phi, cfg.T, pot, params, cfg);
  if (!cfg.T_growth_check) {
    if (horizon_change) *horizon_change = -1.0;
    return a;
  }
  WaveFunction b = s_lambda_at(phi, 2.0 * cfg.T, pot, params, cfg);
  const double change = l2_distance(a, b) / norm(phi);
  if (horizon_change) *horizon_change = change;
  if (change > cfg.tolerance) {
    std::ostringstream os;
    os << "s_lambda_apply: horizon not converged, doubling T = " << cfg.T << " changed the output by " << change
       << " (tolerance " << cfg.tolerance << ")";
    throw ConvergenceError(os.str(), std::move(a), std::move(b), change);
  }
  return a;
}

Vec2 j_direction(int j, const Vec2& v) {
  if (j == 1) return Vec2(1, 0);
  if (j == 2) return Vec2(0, 1);
  if (j == 0) {
    const double vn = v.norm();
    if (vn == 0.0) throw DomainError("j_direction: perpendicular direction needs v != 0");
    return Vec2(-v[1] / vn, v[0] / vn);
  }
  throw DomainError("j_direction: j must be 1, 2 or 0 (perpendicular)");
}

namespace {

struct Scattered {
  WaveFunction sx1, sphi;
};

Scattered scatter_both(const WaveFunction& x1, const WaveFunction& phi_v, double T, const PotentialSpec& pot,
                       const ModelParams& params, const ScatterConfig& cfg) {
  return {s_lambda_at(x1, T, pot, params, cfg), s_lambda_at(phi_v, T, pot, params, cfg)};
}

cplx raw_pairing(const WaveFunction& phi_v, const WaveFunction& psi_v, const WaveFunction& x1, const WaveFunction& y2,
                 const Scattered& s) {
  const cplx a = pair(s.sx1, psi_v) - pair(x1, psi_v);
  const cplx b = pair(s.sphi, y2) - pair(phi_v, y2);
  return phi_v.frame.p.norm() * kI * (a - b);
}

}  // namespace

PairingResult commutator_pairing(const PacketSpec& phi0, const PacketSpec& psi0, const Vec2& v, int j,
                                 const Vec2& offset, const PotentialSpec& pot, const ModelParams& params,
                                 const ScatterConfig& cfg) {
  validate(cfg);
  if (!(v.norm() > 0.0)) throw DomainError("commutator_pairing: |v| must be positive");
  PairingResult r;
  r.v = v;
  r.j = j;
  r.direction = j_direction(j, v);
  r.offset = offset;
  r.T_used = cfg.T;
  r.dt_used = cfg.dt;
  const WaveFunction phi_v = boosted_packet(cfg.grid, phi0, v, offset);
  const WaveFunction psi_v = boosted_packet(cfg.grid, psi0, v, offset);
  const WaveFunction x1 = apply_rel_momentum_dir(phi_v, r.direction);
  const WaveFunction y2 = apply_rel_momentum_dir(psi_v, r.direction);
  const Scattered at_T = scatter_both(x1, phi_v, cfg.T, pot, params, cfg);
  r.value_unmodified = raw_pairing(phi_v, psi_v, x1, y2, at_T);
  auto graf_at = [&](double T) {
    if (cfg.graf_horizon == GrafHorizon::full_line) return graf_phase_total(v, pot, params, offset);
    return graf_phase(v, T, pot, params, offset) - graf_phase(v, -T, pot, params, offset);
  };
  const bool graf = cfg.graf == GrafMode::on && pot.has_regular();
  // I_v = e^{-i Gamma}; the corrected pairing is conj(I_v) times the raw one.
  if (graf) r.graf_phase_total = graf_at(cfg.T);
  r.value = std::polar(1.0, r.graf_phase_total) * r.value_unmodified;
  if (cfg.T_growth_check) {
    Scattered at_2T = scatter_both(x1, phi_v, 2.0 * cfg.T, pot, params, cfg);
    const double change = std::max(l2_distance(at_T.sx1, at_2T.sx1) / norm(x1),
                                   l2_distance(at_T.sphi, at_2T.sphi) / norm(phi_v));
    if (change > cfg.tolerance) {
      std::ostringstream os;
      os << "commutator_pairing: horizon not converged, doubling T = " << cfg.T << " changed S applied to the packets by "
         << change << " (tolerance " << cfg.tolerance << ")";
      throw ConvergenceError(os.str(), at_T.sphi, std::move(at_2T.sphi), change);
    }
    const double g2 = graf ? graf_at(2.0 * cfg.T) : 0.0;
    const cplx v2 = std::polar(1.0, g2) * raw_pairing(phi_v, psi_v, x1, y2, at_2T);
    r.horizon_change = std::abs(v2 - r.value);
  }
  r.oracle = oracle_rhs(pot, phi0, psi0, v / v.norm(), offset, r.direction, cfg.grid);
  return r;
}

namespace {

struct CellRow {
  SinogramCell cell;
  std::string error;
};

struct TaskResult {
  std::vector<CellRow> rows;
};

struct ExistingRows {
  std::vector<std::string> keys;
  std::vector<SinogramCell> cells;
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  return out;
}

ExistingRows read_existing(const std::string& path) {
  ExistingRows ex;
  if (!io::exists(path)) return ex;
  std::string text = io::read_text(path);
  // A trailing partial line from an interrupted run is dropped.
  const auto last_nl = text.rfind('\n');
  if (last_nl == std::string::npos) {
    text.clear();
  } else if (last_nl + 1 != text.size()) {
    text.resize(last_nl + 1);
  }
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line)) return ex;
  if (line != sinogram_csv_header()) throw IoError("existing sweep file has an unexpected header", path);
  while (std::getline(ss, line)) {
    const auto f = split_csv(line);
    if (f.size() != 11) throw IoError("corrupt sweep row", path);
    ex.keys.push_back(f[0] + "," + f[1] + "," + f[2] + "," + f[3]);
    SinogramCell c;
    c.value = cplx(std::strtod(f[4].c_str(), nullptr), std::strtod(f[5].c_str(), nullptr));
    c.oracle = cplx(std::strtod(f[6].c_str(), nullptr), std::strtod(f[7].c_str(), nullptr));
    c.T = std::strtod(f[8].c_str(), nullptr);
    c.dt = std::strtod(f[9].c_str(), nullptr);
    c.graf_phase = std::strtod(f[10].c_str(), nullptr);
    c.ok = std::isfinite(c.value.real()) && std::isfinite(c.value.imag());
    ex.cells.push_back(c);
  }
  return ex;
}

std::string row_key(double theta, double offset, double speed, int j) {
  return io::fmt_double(theta) + "," + io::fmt_double(offset) + "," + io::fmt_double(speed) + "," +
         std::to_string(j);
}

}  // namespace

Sinogram highv_sweep(const SweepSpec& spec, const PotentialSpec& pot, const ModelParams& params,
                     const ScatterConfig& cfg, int jobs, const SweepOutput& out) {
  validate(cfg);
  if (spec.angles.empty() || spec.offsets.empty() || spec.speeds.empty() || spec.js.empty())
    throw ConfigError("highv_sweep: angles, offsets, speeds and j must be non-empty");
  Sinogram sino;
  sino.angles = spec.angles;
  sino.offsets = spec.offsets;
  sino.speeds = spec.speeds;
  sino.js = spec.js;
  sino.cells.resize(sino.size());
  const size_t per_task = spec.speeds.size() * spec.js.size();
  const int n_tasks = static_cast<int>(spec.angles.size() * spec.offsets.size());

  auto key_of = [&](size_t row) {
    const size_t jj = row % spec.js.size();
    const size_t s = (row / spec.js.size()) % spec.speeds.size();
    const size_t task = row / per_task;
    const size_t o = task % spec.offsets.size(), a = task / spec.offsets.size();
    return row_key(spec.angles[a], spec.offsets[o], spec.speeds[s], spec.js[jj]);
  };

  size_t done = 0;
  std::ofstream csv, errs;
  if (!out.csv_path.empty()) {
    const std::string meta_path = out.csv_path + ".json";
    nlohmann::json meta{{"config_hash", out.config_hash},
                        {"angles", spec.angles},
                        {"offsets", spec.offsets},
                        {"speeds", spec.speeds},
                        {"j", spec.js}};
    if (io::exists(meta_path) && io::exists(out.csv_path)) {
      const auto old = io::read_json(meta_path);
      if (old != meta) throw IoError("existing sweep was produced by a different configuration", out.csv_path);
    }
    const ExistingRows ex = read_existing(out.csv_path);
    if (ex.keys.size() > sino.size()) throw IoError("existing sweep has more rows than the geometry", out.csv_path);
    for (size_t r = 0; r < ex.keys.size(); ++r) {
      if (ex.keys[r] != key_of(r)) throw IoError("existing sweep rows do not match the geometry", out.csv_path);
      sino.cells[r] = ex.cells[r];
    }
    done = ex.keys.size();
    io::write_json(meta_path, meta);
    // Rewrite the valid prefix so a dropped partial line cannot linger.
    {
      std::string text = sinogram_csv_header() + "\n";
      if (done > 0) {
        std::string full = io::read_text(out.csv_path);
        size_t pos = full.find('\n') + 1;
        for (size_t r = 0; r < done; ++r) pos = full.find('\n', pos) + 1;
        text = full.substr(0, pos);
      }
      io::write_text(out.csv_path, text);
    }
    csv.open(out.csv_path, std::ios::app);
    if (!csv) throw IoError("cannot open sweep output", out.csv_path);
    const std::string err_path = out.csv_path + ".errors.csv";
    if (!io::exists(err_path)) io::write_text(err_path, "theta,offset,speed,j,message\n");
    errs.open(err_path, std::ios::app);
  }

  std::vector<int> todo;
  for (int t = 0; t < n_tasks; ++t)
    if ((static_cast<size_t>(t) + 1) * per_task > done) todo.push_back(t);

  std::function<TaskResult(int)> compute = [&](int k) {
    const int t = todo[static_cast<size_t>(k)];
    const size_t a = static_cast<size_t>(t) / spec.offsets.size(), o = static_cast<size_t>(t) % spec.offsets.size();
    const double th = spec.angles[a];
    const Vec2 u(std::cos(th), std::sin(th)), nrm(-std::sin(th), std::cos(th));
    TaskResult res;
    for (size_t s = 0; s < spec.speeds.size(); ++s)
      for (size_t jj = 0; jj < spec.js.size(); ++jj) {
        CellRow row;
        try {
          const auto pr = commutator_pairing(spec.packet, spec.packet, spec.speeds[s] * u, spec.js[jj],
                                             spec.offsets[o] * nrm, pot, params, cfg);
          row.cell = SinogramCell{pr.value, pr.oracle, pr.T_used, pr.dt_used, pr.graf_phase_total, true};
        } catch (const std::exception& e) {
          const double nan = std::numeric_limits<double>::quiet_NaN();
          row.cell = SinogramCell{cplx(nan, nan), cplx(nan, nan), cfg.T, cfg.dt, nan, false};
          row.error = e.what();
        }
        res.rows.push_back(std::move(row));
      }
    return res;
  };
  std::function<void(int, TaskResult&)> emit = [&](int k, TaskResult& res) {
    const size_t t = static_cast<size_t>(todo[static_cast<size_t>(k)]);
    const size_t a = t / spec.offsets.size(), o = t % spec.offsets.size();
    for (size_t r = 0; r < res.rows.size(); ++r) {
      const size_t row = t * per_task + r;
      const size_t s = r / spec.js.size(), jj = r % spec.js.size();
      if (row < done) continue;
      sino.cells[row] = res.rows[r].cell;
      if (csv.is_open()) {
        csv << sinogram_csv_row(spec.angles[a], spec.offsets[o], spec.speeds[s], spec.js[jj], res.rows[r].cell)
            << '\n';
        if (!res.rows[r].cell.ok) {
          std::string msg = res.rows[r].error;
          for (auto& ch : msg)
            if (ch == ',' || ch == '\n') ch = ';';
          errs << row_key(spec.angles[a], spec.offsets[o], spec.speeds[s], spec.js[jj]) << ',' << msg << '\n';
        }
      }
    }
    if (csv.is_open()) {
      csv.flush();
      errs.flush();
    }
  };
  ordered_map<TaskResult>(static_cast<int>(todo.size()), jobs, compute, emit);
  return sino;
}

bool Sinogram::complete() const {
  if (cells.size() != size()) return false;
  for (const auto& c : cells)
    if (!c.ok) return false;
  return true;
}

std::vector<double> Sinogram::projection(size_t speed, size_t j, bool use_oracle) const {
  std::vector<double> out(angles.size() * offsets.size());
  for (size_t a = 0; a < angles.size(); ++a)
    for (size_t o = 0; o < offsets.size(); ++o) {
      const auto& c = cells[index(a, o, speed, j)];
      out[a * offsets.size() + o] = use_oracle ? c.oracle.imag() : c.value.imag();
    }
  return out;
}

std::string sinogram_csv_header() { return "theta,offset,speed,j,re_value,im_value,re_oracle,im_oracle,T,dt,graf_phase"; }

std::string sinogram_csv_row(double theta, double offset, double speed, int j, const SinogramCell& c) {
  using io::fmt_double;
  return row_key(theta, offset, speed, j) + "," + fmt_double(c.value.real()) + "," + fmt_double(c.value.imag()) +
         "," + fmt_double(c.oracle.real()) + "," + fmt_double(c.oracle.imag()) + "," + fmt_double(c.T) + "," +
         fmt_double(c.dt) + "," + fmt_double(c.graf_phase);
}

void write_sinogram_csv(const std::string& path, const Sinogram& s) {
  std::string text = sinogram_csv_header() + "\n";
  for (size_t a = 0; a < s.angles.size(); ++a)
    for (size_t o = 0; o < s.offsets.size(); ++o)
      for (size_t k = 0; k < s.speeds.size(); ++k)
        for (size_t j = 0; j < s.js.size(); ++j)
          text += sinogram_csv_row(s.angles[a], s.offsets[o], s.speeds[k], s.js[j], s.cells[s.index(a, o, k, j)]) +
                  "\n";
  io::write_text(path, text);
}

Sinogram read_sinogram_csv(const std::string& path) {
  const ExistingRows ex = read_existing(path);
  Sinogram s;
  auto add_unique = [](auto& v, auto x) {
    for (const auto& y : v)
      if (y == x) return;
    v.push_back(x);
  };
  for (const auto& k : ex.keys) {
    const auto f = split_csv(k);
    add_unique(s.angles, std::strtod(f[0].c_str(), nullptr));
    add_unique(s.offsets, std::strtod(f[1].c_str(), nullptr));
    add_unique(s.speeds, std::strtod(f[2].c_str(), nullptr));
    add_unique(s.js, std::stoi(f[3]));
  }
  if (ex.keys.size() != s.size()) throw IoError("sweep file is incomplete or not a full grid", path);
  s.cells = ex.cells;
  for (size_t r = 0; r < ex.keys.size(); ++r) {
    const size_t jj = r % s.js.size(), sp = (r / s.js.size()) % s.speeds.size();
    const size_t o = (r / (s.js.size() * s.speeds.size())) % s.offsets.size();
    const size_t a = r / (s.js.size() * s.speeds.size() * s.offsets.size());
    if (ex.keys[r] != row_key(s.angles[a], s.offsets[o], s.speeds[sp], s.js[jj]))
      throw IoError("sweep rows are not in angle, offset, speed, j order", path);
  }
  return s;
}

}  // namespace qstomo
