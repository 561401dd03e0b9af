#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "qstomo/errors.hpp"
#include "qstomo/experiment.hpp"
#include "qstomo/io.hpp"
#include "qstomo/parallel.hpp"

// Exit codes: 0 success, 1 failed check or cell, 2 usage or config error, 3 I/O error, 4 numerical error.
namespace {

struct Options {
  std::string config;
  std::string out;
  int jobs = 0;
  std::vector<double> v{8.0, 0.0};
  std::vector<double> offset{0.0, 0.0};
  int j = 2;
  std::string sinogram;
  std::vector<std::string> inputs;
};

int run(const std::string& cmd, const Options& o) {
  using namespace qstomo;
  const ExperimentConfig cfg = load_config(o.config);
  const std::string out = o.out.empty() ? cfg.output_dir : o.out;
  const int jobs = resolve_jobs(o.jobs);
  if (cmd == "validate") {
    const auto r = run_validate(cfg, out);
    for (const auto& c : r.report["checks"])
      std::printf("%-30s %s residual=%.3e threshold=%.1e\n", c["name"].get<std::string>().c_str(),
                  c["passed"].get<bool>() ? "PASS" : "FAIL", c["residual"].get<double>(),
                  c["threshold"].get<double>());
    return r.exit_code;
  }
  if (cmd == "pairing") {
    if (o.j < 0 || o.j > 2) throw ConfigError("--j must be 0, 1 or 2");
    const PairingResult r = run_pairing(cfg, Vec2(o.v[0], o.v[1]), o.j, Vec2(o.offset[0], o.offset[1]));
    const auto j = to_json(r);
    io::ensure_dir(out);
    io::write_json(out + "/pairing.json", nlohmann::json{{"config_hash", cfg.hash}, {"result", j}});
    std::printf("vx,vy,j,offset_x,offset_y,re_value,im_value,re_value_unmodified,im_value_unmodified,re_oracle,"
                "im_oracle,relative_error,graf_phase\n");
    std::printf("%s,%s,%d,%s,%s,%s,%s,%s,%s,%s,%s,%s,%s\n", io::fmt_double(r.v[0]).c_str(),
                io::fmt_double(r.v[1]).c_str(), r.j, io::fmt_double(r.offset[0]).c_str(),
                io::fmt_double(r.offset[1]).c_str(), io::fmt_double(r.value.real()).c_str(),
                io::fmt_double(r.value.imag()).c_str(), io::fmt_double(r.value_unmodified.real()).c_str(),
                io::fmt_double(r.value_unmodified.imag()).c_str(), io::fmt_double(r.oracle.real()).c_str(),
                io::fmt_double(r.oracle.imag()).c_str(),
                j["relative_error"].is_null() ? "nan" : io::fmt_double(j["relative_error"].get<double>()).c_str(),
                io::fmt_double(r.graf_phase_total).c_str());
    return 0;
  }
  if (cmd == "sweep") {
    const auto r = run_sweep(cfg, jobs, out);
    std::cout << r.report.dump(2) << "\n";
    return r.exit_code;
  }
  if (cmd == "reconstruct") {
    const std::string sino = o.sinogram.empty() ? out + "/sinogram.csv" : o.sinogram;
    const auto r = run_reconstruct(cfg, sino, jobs, out);
    for (const auto& f : r.report["fields"])
      std::printf("%-28s relative L2 (interior) = %.4g\n", f["name"].get<std::string>().c_str(),
                  f["relative_l2_interior"].get<double>());
    return 0;
  }
  const auto r = run_report(cfg, out, o.inputs);
  std::cout << r.report["error_vs_speed"].dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"High-velocity scattering tomography for a time-decaying repulsive quadratic Hamiltonian"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* s) {
    s->add_option("--config", o.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    s->add_option("--jobs", o.jobs, "worker threads (default: QS_TOMO_JOBS, else 1)")->check(CLI::PositiveNumber);
    s->add_option("--out", o.out, "output directory (default: output_dir of the config)");
  };
  auto* val = app.add_subcommand("validate", "run the invariant suite");
  auto* pair = app.add_subcommand("pairing", "evaluate one commutator pairing against its oracle");
  auto* sweep = app.add_subcommand("sweep", "compute the sinogram (resumable)");
  auto* rec = app.add_subcommand("reconstruct", "filtered back-projection of a sinogram");
  auto* rep = app.add_subcommand("report", "summary JSON and CSV tables");
  for (auto* s : {val, pair, sweep, rec, rep}) common(s);
  pair->add_option("--v", o.v, "velocity VX VY")->expected(2);
  pair->add_option("--offset", o.offset, "line offset OX OY")->expected(2);
  pair->add_option("--j", o.j, "1, 2, or 0 for the direction perpendicular to v");
  rec->add_option("--sinogram", o.sinogram, "sinogram CSV (default: <out>/sinogram.csv)");
  rep->add_option("inputs", o.inputs, "sinogram CSVs and reconstruct.json (default: those in <out>)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  std::string cmd;
  for (auto* s : {val, pair, sweep, rec, rep})
    if (s->parsed()) cmd = s->get_name();
  try {
    return run(cmd, o);
  } catch (const qstomo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const qstomo::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const qstomo::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
