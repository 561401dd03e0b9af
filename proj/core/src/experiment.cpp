#include "qstomo/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <initializer_list>
#include <sstream>

#include "qstomo/errors.hpp"
#include "qstomo/io.hpp"
#include "qstomo/validation.hpp"

namespace qstomo {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(section + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError(section + ": unknown key " + it.key());
  }
}

double number(const json& j, const std::string& section, const char* key) {
  if (!j.contains(key)) throw ConfigError(section + ": " + key + " is required");
  if (!j[key].is_number()) throw ConfigError(section + ": " + key + " must be a number");
  return j[key].get<double>();
}

double number_or(const json& j, const std::string& section, const char* key, double fallback) {
  return j.contains(key) ? number(j, section, key) : fallback;
}

int integer(const json& j, const std::string& section, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer())
    throw ConfigError(section + ": " + key + " must be an integer");
  return j[key].get<int>();
}

bool boolean_or(const json& j, const std::string& section, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean()) throw ConfigError(section + ": " + key + " must be a boolean");
  return j[key].get<bool>();
}

std::string choice(const json& j, const std::string& section, const char* key, std::initializer_list<const char*> opts,
                   const char* fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string()) throw ConfigError(section + ": " + key + " must be a string");
  const std::string s = j[key].get<std::string>();
  for (const char* o : opts)
    if (s == o) return s;
  std::string msg = section + ": " + key + " must be one of";
  for (const char* o : opts) msg += std::string(" ") + o;
  throw ConfigError(msg);
}

std::vector<double> number_list(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ConfigError(what + ": expected a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& e : j) {
    if (!e.is_number()) throw ConfigError(what + ": expected a non-empty array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

GridSpec grid_from(const json& j, const std::string& section) {
  check_keys(j, section, {"n_points", "extent"});
  try {
    return GridSpec::make(integer(j, section, "n_points"), number(j, section, "extent"));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(section + ": " + e.what());
  }
}

// {"count": M} gives M angles pi a / M; a list is taken as is.
std::vector<double> angles_from(const json& j) {
  if (j.is_array()) return number_list(j, "scatter.angles");
  check_keys(j, "scatter.angles", {"count"});
  const int m = integer(j, "scatter.angles", "count");
  if (m < 1) throw ConfigError("scatter.angles: count must be positive");
  std::vector<double> a(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) a[static_cast<size_t>(i)] = kPi * i / m;
  return a;
}

std::vector<double> offsets_from(const json& j) {
  if (j.is_array()) return number_list(j, "scatter.offsets");
  check_keys(j, "scatter.offsets", {"min", "max", "count"});
  const double lo = number(j, "scatter.offsets", "min"), hi = number(j, "scatter.offsets", "max");
  const int m = integer(j, "scatter.offsets", "count");
  if (m < 1 || (m > 1 && !(hi > lo))) throw ConfigError("scatter.offsets: need count >= 1 and max > min");
  std::vector<double> o(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) o[static_cast<size_t>(i)] = m == 1 ? lo : lo + (hi - lo) * i / (m - 1);
  return o;
}

const char* filter_name(Filter f) { return f == Filter::ram_lak ? "ram_lak" : "shepp_logan"; }

json normalized_json(const ExperimentConfig& c) {
  const ScatterConfig& s = c.scatter;
  json j;
  j["params"] = to_json(c.params);
  j["potential"] = to_json(c.potential);
  j["grid"] = {{"n_points", s.grid.n}, {"extent", s.grid.extent}};
  j["evolve"] = {{"dt", s.dt},
                 {"mode", s.mode == FrameMode::lens ? "lens" : "comoving"},
                 {"band_tolerance", s.band_tolerance},
                 {"skip_tolerance", s.skip_tolerance},
                 {"potential_smoothing", s.potential_smoothing}};
  j["scatter"] = {{"T", s.T},
                  {"speeds", c.sweep.speeds},
                  {"angles", c.sweep.angles},
                  {"offsets", c.sweep.offsets},
                  {"js", c.sweep.js},
                  {"graf_mode", s.graf == GrafMode::on ? "on" : "off"},
                  {"graf_horizon", s.graf_horizon == GrafHorizon::matched ? "matched" : "full_line"},
                  {"comparison", s.comparison == Comparison::continuous ? "continuous" : "lambda_literal"},
                  {"T_growth_check", s.T_growth_check},
                  {"tolerance", s.tolerance}};
  j["packet"] = {{"width", c.sweep.packet.width}};
  j["reconstruct"] = {{"filter", filter_name(c.reconstruct.filter)},
                      {"deconvolve", c.reconstruct.deconvolve},
                      {"n_points", c.reconstruct.n},
                      {"extent", c.reconstruct.extent},
                      {"interior_fraction", c.reconstruct.interior_fraction}};
  if (c.decay)
    j["decay"] = {{"speeds", c.decay->speeds},
                  {"theta", c.decay->theta},
                  {"offset", c.decay->offset},
                  {"T", c.decay->T},
                  {"dt", c.decay->dt},
                  {"grid", {{"n_points", c.decay->grid.n}, {"extent", c.decay->grid.extent}}}};
  j["seed"] = c.seed;
  return j;
}

std::string join(const std::string& dir, const std::string& name) {
  if (dir.empty()) return name;
  return dir.back() == '/' ? dir + name : dir + "/" + name;
}

// Outputs name their inputs by file name only, so that they do not depend on where a run lives.
std::string base_name(const std::string& path) { return path.substr(path.find_last_of('/') + 1); }

std::string tag(double x) {
  std::string s = io::fmt_double(x);
  std::replace(s.begin(), s.end(), '.', 'p');
  std::replace(s.begin(), s.end(), '-', 'm');
  return s;
}

// Im(value) samples the smeared line integral of e_j . grad V; only the axis labels have a fixed e.
std::optional<int> axis_of(int j) {
  if (j == 1) return 0;
  if (j == 2) return 1;
  return std::nullopt;
}

ScatterConfig decay_scatter(const ExperimentConfig& cfg) {
  ScatterConfig s = cfg.scatter;
  s.grid = cfg.decay->grid;
  s.T = cfg.decay->T;
  s.dt = cfg.decay->dt;
  s.T_growth_check = true;
  return s;
}

SweepSpec decay_sweep(const ExperimentConfig& cfg) {
  SweepSpec sw = cfg.sweep;
  sw.angles = {cfg.decay->theta};
  sw.offsets = {cfg.decay->offset};
  sw.speeds = cfg.decay->speeds;
  return sw;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  check_keys(j, "config",
             {"params", "potential", "grid", "evolve", "scatter", "packet", "reconstruct", "decay", "output_dir",
              "seed"});
  for (const char* k : {"params", "potential", "grid", "scatter"})
    if (!j.contains(k)) throw ConfigError(std::string("config: ") + k + " is required");
  ExperimentConfig c;
  c.params = params_from_json(j["params"]);
  c.potential = potential_from_json(j["potential"]);
  ScatterConfig& s = c.scatter;
  s.grid = grid_from(j["grid"], "grid");

  if (j.contains("evolve")) {
    const json& e = j["evolve"];
    check_keys(e, "evolve", {"dt", "mode", "band_tolerance", "skip_tolerance", "potential_smoothing"});
    s.dt = number_or(e, "evolve", "dt", s.dt);
    s.mode = choice(e, "evolve", "mode", {"lens", "comoving"}, "lens") == "lens" ? FrameMode::lens : FrameMode::comoving;
    s.band_tolerance = number_or(e, "evolve", "band_tolerance", s.band_tolerance);
    s.skip_tolerance = number_or(e, "evolve", "skip_tolerance", s.skip_tolerance);
    s.potential_smoothing = number_or(e, "evolve", "potential_smoothing", s.potential_smoothing);
    if (!(s.dt > 0.0)) throw ConfigError("evolve: dt must be positive");
    if (!(s.band_tolerance > 0.0) || s.skip_tolerance < 0.0 || s.potential_smoothing < 0.0)
      throw ConfigError("evolve: tolerances must be positive and potential_smoothing non-negative");
  }

  const json& sc = j["scatter"];
  check_keys(sc, "scatter",
             {"T", "speeds", "angles", "offsets", "js", "graf_mode", "graf_horizon", "comparison", "T_growth_check",
              "tolerance"});
  s.T = number(sc, "scatter", "T");
  if (!(s.T > 1.0)) throw ConfigError("scatter: T must exceed 1, the comparison dynamics is defined for |T| > 1");
  if (!sc.contains("speeds")) throw ConfigError("scatter: speeds is required");
  c.sweep.speeds = number_list(sc["speeds"], "scatter.speeds");
  for (double v : c.sweep.speeds)
    if (!(v > 0.0)) throw ConfigError("scatter.speeds: speeds must be positive");
  c.sweep.angles = sc.contains("angles") ? angles_from(sc["angles"]) : std::vector<double>{0.0};
  c.sweep.offsets = sc.contains("offsets") ? offsets_from(sc["offsets"]) : std::vector<double>{0.0};
  if (sc.contains("js")) {
    if (!sc["js"].is_array() || sc["js"].empty()) throw ConfigError("scatter.js: expected a non-empty array");
    c.sweep.js.clear();
    for (const auto& e : sc["js"]) {
      if (!e.is_number_integer() || e.get<int>() < 0 || e.get<int>() > 2)
        throw ConfigError("scatter.js: entries must be 0, 1 or 2");
      c.sweep.js.push_back(e.get<int>());
    }
  }
  s.graf = choice(sc, "scatter", "graf_mode", {"off", "on"}, "off") == "on" ? GrafMode::on : GrafMode::off;
  s.graf_horizon = choice(sc, "scatter", "graf_horizon", {"matched", "full_line"}, "matched") == "matched"
                       ? GrafHorizon::matched
                       : GrafHorizon::full_line;
  s.comparison = choice(sc, "scatter", "comparison", {"continuous", "lambda_literal"}, "continuous") == "continuous"
                     ? Comparison::continuous
                     : Comparison::lambda_literal;
  s.T_growth_check = boolean_or(sc, "scatter", "T_growth_check", s.T_growth_check);
  s.tolerance = number_or(sc, "scatter", "tolerance", s.tolerance);
  if (!(s.tolerance > 0.0)) throw ConfigError("scatter: tolerance must be positive");
  validate(s);

  if (j.contains("packet")) {
    check_keys(j["packet"], "packet", {"width"});
    c.sweep.packet.width = number(j["packet"], "packet", "width");
    if (!(c.sweep.packet.width > 0.0)) throw ConfigError("packet: width must be positive");
  }

  if (j.contains("reconstruct")) {
    const json& r = j["reconstruct"];
    check_keys(r, "reconstruct", {"filter", "deconvolve", "n_points", "extent", "interior_fraction"});
    c.reconstruct.filter = choice(r, "reconstruct", "filter", {"ram_lak", "shepp_logan"}, "ram_lak") == "ram_lak"
                               ? Filter::ram_lak
                               : Filter::shepp_logan;
    c.reconstruct.deconvolve = boolean_or(r, "reconstruct", "deconvolve", c.reconstruct.deconvolve);
    if (r.contains("n_points")) c.reconstruct.n = integer(r, "reconstruct", "n_points");
    c.reconstruct.extent = number_or(r, "reconstruct", "extent", c.reconstruct.extent);
    c.reconstruct.interior_fraction = number_or(r, "reconstruct", "interior_fraction", c.reconstruct.interior_fraction);
    if (c.reconstruct.n < 8 || !(c.reconstruct.extent > 0.0) || !(c.reconstruct.interior_fraction > 0.0) ||
        c.reconstruct.interior_fraction > 1.0)
      throw ConfigError("reconstruct: need n_points >= 8, extent > 0 and 0 < interior_fraction <= 1");
  }

  if (j.contains("decay")) {
    const json& d = j["decay"];
    check_keys(d, "decay", {"speeds", "theta", "offset", "grid", "T", "dt"});
    DecayStudy ds;
    if (!d.contains("speeds")) throw ConfigError("decay: speeds is required");
    ds.speeds = number_list(d["speeds"], "decay.speeds");
    for (double v : ds.speeds)
      if (!(v > 0.0)) throw ConfigError("decay.speeds: speeds must be positive");
    ds.theta = number_or(d, "decay", "theta", 0.0);
    ds.offset = number_or(d, "decay", "offset", 0.0);
    if (d.contains("grid")) ds.grid = grid_from(d["grid"], "decay.grid");
    ds.T = number_or(d, "decay", "T", ds.T);
    ds.dt = number_or(d, "decay", "dt", ds.dt);
    if (!(ds.T > 1.0) || !(ds.dt > 0.0)) throw ConfigError("decay: need T > 1 and dt > 0");
    c.decay = ds;
  }

  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) throw ConfigError("config: output_dir must be a string");
    c.output_dir = j["output_dir"].get<std::string>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("config: seed must be a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  c.normalized = normalized_json(c);
  c.hash = io::config_hash(c.normalized);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  json j;
  try {
    j = json::parse(io::read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return config_from_json(j);
}

CommandResult run_validate(const ExperimentConfig& cfg, const std::string& out_dir) {
  using namespace checks;
  const ModelParams& p = cfg.params;
  std::vector<CheckResult> rs;
  rs.push_back(lambda_newton(p.sigma));
  rs.push_back(mehler_moments(p, GridSpec::make(128, 16), 0.7));
  rs.push_back(mehler_moments(p, GridSpec::make(128, 24), 1.0));
  rs.push_back(generator(p, 2.0, 1e-3, GridSpec::make(256, 32)));
  rs.push_back(generator(p, 0.5, 1e-3, GridSpec::make(256, 32)));
  rs.push_back(cocycle(p, GridSpec::make(128, 16), 1.5, 2.5, 4.0, cfg.seed));
  rs.push_back(cocycle(p, GridSpec::make(128, 16), -1.5, -2.5, -4.0, cfg.seed + 1));
  rs.push_back(mehler_vs_strang(p, GridSpec::make(512, 32), 5e-4));
  rs.push_back(frame_covariance(p, cfg.potential, Vec2(3.0, 0.0), GridSpec::make(128, 16), GridSpec::make(512, 24),
                                0.5, 2.5e-4));
  rs.push_back(envelope_boost_independence(p, GridSpec::make(128, 16), Vec2(3.0, 0.0), 0.5, 1e-3));
  rs.push_back(decay_sampler(cfg.potential, p));

  CommandResult out;
  json list = json::array();
  bool all = true;
  for (const auto& r : rs) {
    list.push_back(to_json(r));
    all = all && r.passed;
  }
  out.exit_code = all ? 0 : 1;
  out.report = {{"config_hash", cfg.hash}, {"passed", all}, {"checks", list}};
  io::ensure_dir(out_dir);
  io::write_json(join(out_dir, "validate.json"), out.report);
  return out;
}

PairingResult run_pairing(const ExperimentConfig& cfg, const Vec2& v, int j, const Vec2& offset) {
  return commutator_pairing(cfg.sweep.packet, cfg.sweep.packet, v, j, offset, cfg.potential, cfg.params, cfg.scatter);
}

json to_json(const PairingResult& r) {
  const double on = std::abs(r.oracle);
  return {{"v", {r.v[0], r.v[1]}},
          {"j", r.j},
          {"direction", {r.direction[0], r.direction[1]}},
          {"offset", {r.offset[0], r.offset[1]}},
          {"value", {r.value.real(), r.value.imag()}},
          {"value_unmodified", {r.value_unmodified.real(), r.value_unmodified.imag()}},
          {"oracle", {r.oracle.real(), r.oracle.imag()}},
          {"relative_error", on > 0.0 ? json(std::abs(r.value - r.oracle) / on) : json(nullptr)},
          {"abs_error", std::abs(r.value - r.oracle)},
          {"graf_phase", r.graf_phase_total},
          {"T", r.T_used},
          {"dt", r.dt_used},
          {"horizon_change", r.horizon_change}};
}

CommandResult run_sweep(const ExperimentConfig& cfg, int jobs, const std::string& out_dir) {
  io::ensure_dir(out_dir);
  CommandResult out;
  json timing{{"config_hash", cfg.hash}, {"jobs", jobs}};
  auto summarize = [](const Sinogram& s) {
    size_t failed = 0;
    for (const auto& c : s.cells) failed += c.ok ? 0 : 1;
    return json{{"cells", s.cells.size()}, {"failed", failed}};
  };
  auto t0 = std::chrono::steady_clock::now();
  const Sinogram s = highv_sweep(cfg.sweep, cfg.potential, cfg.params, cfg.scatter, jobs,
                                 {join(out_dir, "sinogram.csv"), cfg.hash});
  timing["sinogram_seconds"] = seconds_since(t0);
  out.report["sinogram"] = summarize(s);
  size_t failed = out.report["sinogram"]["failed"].get<size_t>();
  if (cfg.decay) {
    t0 = std::chrono::steady_clock::now();
    const Sinogram d = highv_sweep(decay_sweep(cfg), cfg.potential, cfg.params, decay_scatter(cfg), jobs,
                                   {join(out_dir, "decay.csv"), cfg.hash});
    timing["decay_seconds"] = seconds_since(t0);
    out.report["decay"] = summarize(d);
    failed += out.report["decay"]["failed"].get<size_t>();
  }
  io::write_json(join(out_dir, "timing_sweep.json"), timing);
  out.report["config_hash"] = cfg.hash;
  out.exit_code = failed == 0 ? 0 : 1;
  return out;
}

CommandResult run_reconstruct(const ExperimentConfig& cfg, const std::string& sinogram_path, int jobs,
                              const std::string& out_dir) {
  if (!io::exists(sinogram_path)) throw IoError("sinogram not found", sinogram_path);
  const Sinogram s = read_sinogram_csv(sinogram_path);
  io::ensure_dir(out_dir);
  const ReconstructConfig& rc = cfg.reconstruct;
  const std::optional<double> width =
      rc.deconvolve ? std::optional<double>(cfg.sweep.packet.width) : std::nullopt;
  const double frac = rc.interior_fraction;

  auto t0 = std::chrono::steady_clock::now();
  FieldGrid truth[2];
  for (int a = 0; a < 2; ++a)
    truth[a] = sample_field([&](const Vec2& x) { return grad_v(cfg.potential, x)[a]; }, rc.n, rc.extent);
  const FieldGrid v_truth = sample_field([&](const Vec2& x) { return eval_v(cfg.potential, x); }, rc.n, rc.extent);

  json fields = json::array();
  auto record = [&](const std::string& name, const FieldGrid& f, const FieldGrid& ref, const std::string& quantity,
                    double speed, int j, const char* source) {
    write_field(join(out_dir, name), f, cfg.hash, quantity);
    fields.push_back({{"name", name},
                      {"quantity", quantity},
                      {"speed", speed},
                      {"j", j},
                      {"source", source},
                      {"relative_l2_interior", relative_l2(f, ref, frac)}});
  };
  for (int a = 0; a < 2; ++a) {
    const std::string q = "dV" + std::to_string(a + 1);
    write_field(join(out_dir, "reference_" + q), truth[a], cfg.hash, "d" + std::to_string(a + 1) + " V reference");
  }
  for (size_t si = 0; si < s.speeds.size(); ++si) {
    std::optional<FieldGrid> grads[2][2];  // [source][axis]
    for (size_t ji = 0; ji < s.js.size(); ++ji) {
      const auto axis = axis_of(s.js[ji]);
      if (!axis) continue;
      for (int src = 0; src < 2; ++src) {
        const FieldGrid f = fbp_invert(s.angles, s.offsets, s.projection(si, ji, src == 1), rc.filter, width, rc.n,
                                       rc.extent, jobs);
        const std::string q = "dV" + std::to_string(*axis + 1);
        const std::string name = std::string(src == 1 ? "recon_oracle_" : "recon_") + q + "_v" + tag(s.speeds[si]);
        record(name, f, truth[*axis], "d" + std::to_string(*axis + 1) + " V", s.speeds[si], s.js[ji],
               src == 1 ? "oracle" : "scattering");
        grads[src][*axis] = f;
      }
    }
    for (int src = 0; src < 2; ++src) {
      if (!grads[src][0] || !grads[src][1]) continue;
      const FieldGrid v = potential_from_gradient(*grads[src][0], *grads[src][1]);
      const std::string name = std::string(src == 1 ? "recon_oracle_" : "recon_") + "V_v" + tag(s.speeds[si]);
      record(name, v, v_truth, "V", s.speeds[si], -1, src == 1 ? "oracle" : "scattering");
    }
  }
  io::write_json(join(out_dir, "timing_reconstruct.json"),
                 {{"config_hash", cfg.hash}, {"jobs", jobs}, {"seconds", seconds_since(t0)}});

  CommandResult out;
  out.report = {{"config_hash", cfg.hash},
                {"sinogram", base_name(sinogram_path)},
                {"filter", filter_name(rc.filter)},
                {"deconvolve", rc.deconvolve},
                {"interior_fraction", frac},
                {"fields", fields}};
  io::write_json(join(out_dir, "reconstruct.json"), out.report);
  return out;
}

namespace {

struct SpeedRow {
  std::string source;
  double speed = 0.0;
  int j = 0;
  size_t cells = 0;
  double rel_err = 0.0;     // ||value - oracle|| / ||oracle|| over the ok cells
  double im_rel_err = 0.0;  // same with Im parts only
  double max_abs_err = 0.0;
};

std::vector<SpeedRow> speed_rows(const Sinogram& s, const std::string& source) {
  std::vector<SpeedRow> rows;
  for (size_t si = 0; si < s.speeds.size(); ++si)
    for (size_t ji = 0; ji < s.js.size(); ++ji) {
      SpeedRow r{source, s.speeds[si], s.js[ji]};
      double num = 0, den = 0, inum = 0, iden = 0;
      for (size_t a = 0; a < s.angles.size(); ++a)
        for (size_t o = 0; o < s.offsets.size(); ++o) {
          const SinogramCell& c = s.cells[s.index(a, o, si, ji)];
          if (!c.ok) continue;
          ++r.cells;
          const cplx d = c.value - c.oracle;
          num += std::norm(d);
          den += std::norm(c.oracle);
          inum += d.imag() * d.imag();
          iden += c.oracle.imag() * c.oracle.imag();
          r.max_abs_err = std::max(r.max_abs_err, std::abs(d));
        }
      r.rel_err = den > 0 ? std::sqrt(num / den) : 0.0;
      r.im_rel_err = iden > 0 ? std::sqrt(inum / iden) : 0.0;
      rows.push_back(r);
    }
  return rows;
}

// Least-squares slope of log(err) on log(speed) over the last two speeds of a source/j series.
std::optional<double> terminal_slope(const std::vector<SpeedRow>& rows, const std::string& source, int j) {
  std::vector<const SpeedRow*> ser;
  for (const auto& r : rows)
    if (r.source == source && r.j == j && r.rel_err > 0.0) ser.push_back(&r);
  if (ser.size() < 2) return std::nullopt;
  std::sort(ser.begin(), ser.end(), [](const SpeedRow* a, const SpeedRow* b) { return a->speed < b->speed; });
  const SpeedRow& a = *ser[ser.size() - 2];
  const SpeedRow& b = *ser.back();
  return std::log(b.rel_err / a.rel_err) / std::log(b.speed / a.speed);
}

Sinogram read_sinogram_or_empty(const std::string& path) {
  // A header-only file is a valid empty sinogram.
  const std::string text = io::read_text(path);
  if (text.find('\n') == std::string::npos || text.find('\n') + 1 >= text.size()) {
    if (text.rfind(sinogram_csv_header(), 0) != 0) throw IoError("not a sinogram file", path);
    return Sinogram{};
  }
  return read_sinogram_csv(path);
}

}  // namespace

CommandResult run_report(const ExperimentConfig& cfg, const std::string& out_dir,
                         const std::vector<std::string>& inputs) {
  std::vector<std::string> paths = inputs;
  if (paths.empty()) {
    paths.push_back(join(out_dir, "sinogram.csv"));
    for (const char* opt : {"decay.csv", "reconstruct.json"})
      if (io::exists(join(out_dir, opt))) paths.push_back(join(out_dir, opt));
  }
  std::vector<SpeedRow> rows;
  json recon = json::array();
  json timing = json::object();
  json sources = json::array();
  bool any_cells = false;
  for (const auto& p : paths) {
    if (!io::exists(p)) throw IoError("report input not found", p);
    const bool is_csv = p.size() > 4 && p.substr(p.size() - 4) == ".csv";
    if (is_csv) {
      const Sinogram s = read_sinogram_or_empty(p);
      const std::string base = base_name(p);
      const std::string source = base.substr(0, base.size() - 4);
      any_cells = any_cells || !s.cells.empty();
      auto r = speed_rows(s, source);
      rows.insert(rows.end(), r.begin(), r.end());
      sources.push_back({{"file", base}, {"source", source}, {"cells", s.cells.size()}});
    } else {
      json j;
      try {
        j = io::read_json(p);
      } catch (const json::exception&) {
        throw IoError("corrupt report input", p);
      }
      if (!j.contains("fields") || !j["fields"].is_array()) throw IoError("not a reconstruct report", p);
      for (const auto& f : j["fields"]) recon.push_back(f);
      sources.push_back({{"file", base_name(p)}, {"source", "reconstruct"}});
    }
  }
  const bool empty = !any_cells;
  if (empty && rows.empty())
    for (double v : cfg.sweep.speeds)
      for (int j : cfg.sweep.js) rows.push_back(SpeedRow{"sinogram", v, j});

  std::string csv = "source,speed,j,cells,rel_err,im_rel_err,max_abs_err\n";
  json table = json::array();
  for (const auto& r : rows) {
    csv += r.source + "," + io::fmt_double(r.speed) + "," + std::to_string(r.j) + "," + std::to_string(r.cells) + "," +
           io::fmt_double(r.rel_err) + "," + io::fmt_double(r.im_rel_err) + "," + io::fmt_double(r.max_abs_err) + "\n";
    table.push_back({{"source", r.source},
                     {"speed", r.speed},
                     {"j", r.j},
                     {"cells", r.cells},
                     {"rel_err", r.rel_err},
                     {"im_rel_err", r.im_rel_err},
                     {"max_abs_err", r.max_abs_err}});
  }
  std::string rcsv = "name,quantity,source,speed,j,relative_l2_interior\n";
  for (const auto& f : recon)
    rcsv += f.value("name", "") + "," + f.value("quantity", "") + "," + f.value("source", "") + "," +
            io::fmt_double(f.value("speed", 0.0)) + "," + std::to_string(f.value("j", 0)) + "," +
            io::fmt_double(f.value("relative_l2_interior", 0.0)) + "\n";

  json slopes = json::object();
  for (const auto& r : rows) {
    const std::string key = r.source + "_j" + std::to_string(r.j);
    if (slopes.contains(key)) continue;
    const auto sl = terminal_slope(rows, r.source, r.j);
    slopes[key] = sl ? json(*sl) : json(nullptr);
  }

  // Wall-clock times are kept out of report.json so that it stays reproducible.
  for (const char* t : {"timing_sweep.json", "timing_reconstruct.json"})
    if (io::exists(join(out_dir, t))) timing[t] = io::read_json(join(out_dir, t));

  io::ensure_dir(out_dir);
  io::write_text(join(out_dir, "error_vs_speed.csv"), csv);
  io::write_text(join(out_dir, "reconstruction_errors.csv"), rcsv);
  CommandResult out;
  out.report = {{"config_hash", cfg.hash},
                {"empty", empty},
                {"inputs", sources},
                {"error_vs_speed", table},
                {"terminal_slope", slopes},
                {"reconstruction", recon}};
  io::write_json(join(out_dir, "report.json"), out.report);
  io::write_json(join(out_dir, "report_timing.json"), {{"config_hash", cfg.hash}, {"runtimes", timing}});
  return out;
}

}  // namespace qstomo
