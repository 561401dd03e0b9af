#include <benchmark/benchmark.h>

#include <cmath>

#include "qstomo/dynamics.hpp"
#include "qstomo/fft.hpp"
#include "qstomo/scatter.hpp"
#include "qstomo/tomo.hpp"

using namespace qstomo;

namespace {

const ModelParams kP = ModelParams::make(2.0, 0.8);

PotentialSpec bump() {
  PotentialSpec s;
  s.regular.push_back(RegularTerm{RegularKind::gaussian, 1.0, Vec2(0.0, 1.0), 1.0});
  return s;
}

void BM_fft2d(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  CVec data(static_cast<size_t>(n) * n);
  for (size_t i = 0; i < data.size(); ++i) data[i] = cplx(std::sin(0.1 * i), std::cos(0.3 * i));
  for (auto _ : st) {
    fft::forward_2d(n, data.data());
    fft::inverse_2d(n, data.data());
    benchmark::DoNotOptimize(data.data());
  }
  st.SetItemsProcessed(st.iterations() * 2);
}
BENCHMARK(BM_fft2d)->Arg(64)->Arg(128)->Arg(256)->Arg(512);

// 100 lens steps across the potential.
void BM_lens_steps(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const GridSpec g = GridSpec::make(n, n / 4.0);
  const WaveFunction psi = gaussian_packet(g, 1.0, Vec2::Zero(), Vec2(8.0, 0.0));
  EvolveConfig cfg;
  cfg.mode = FrameMode::lens;
  cfg.dt = 5e-3;
  cfg.potential_smoothing = 2.0;
  for (auto _ : st) benchmark::DoNotOptimize(evolve(psi, -0.25, 0.25, bump(), kP, cfg));
  st.SetItemsProcessed(st.iterations() * 100);
}
BENCHMARK(BM_lens_steps)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_pairing(benchmark::State& st) {
  ScatterConfig cfg;
  cfg.dt = 5e-3;
  cfg.T = 2.0;
  cfg.potential_smoothing = 2.0;
  for (auto _ : st)
    benchmark::DoNotOptimize(
        commutator_pairing(PacketSpec{}, PacketSpec{}, Vec2(8.0, 0.0), 2, Vec2::Zero(), bump(), kP, cfg));
}
BENCHMARK(BM_pairing)->Unit(benchmark::kMillisecond);

void BM_oracle(benchmark::State& st) {
  for (auto _ : st)
    benchmark::DoNotOptimize(oracle_rhs(bump(), PacketSpec{}, PacketSpec{}, Vec2(1, 0), Vec2(0.0, 0.5), Vec2(0, 1),
                                        GridSpec::make(64, 16.0)));
}
BENCHMARK(BM_oracle)->Unit(benchmark::kMillisecond);

void BM_fbp(benchmark::State& st) {
  const int m = static_cast<int>(st.range(0));
  std::vector<double> ang, off, vals;
  for (int a = 0; a < m; ++a) ang.push_back(kPi * a / m);
  for (int o = 0; o < 65; ++o) off.push_back(-6.0 + 12.0 * o / 64);
  for (size_t i = 0; i < ang.size() * off.size(); ++i) vals.push_back(std::exp(-std::pow(off[i % 65], 2)));
  for (auto _ : st) benchmark::DoNotOptimize(fbp_invert(ang, off, vals, Filter::ram_lak, 1.0, 64, 10.0));
}
BENCHMARK(BM_fbp)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
