#include <complex>
#include <numbers>
#include <vector>

#include <benchmark/benchmark.h>

#include "selforg/boundary.hpp"
#include "selforg/dicke.hpp"
#include "selforg/fft.hpp"
#include "selforg/gpe.hpp"

using namespace selforg;

namespace {

constexpr double pi = std::numbers::pi;

void BM_Fft2D(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Fft2D fft(n, n);
  std::vector<std::complex<double>> data(static_cast<std::size_t>(n) * n, {1.0, 0.5});
  for (auto _ : state) {
    fft.forward(data);
    fft.backward(data);
    benchmark::DoNotOptimize(data.data());
  }
  state.SetItemsProcessed(state.iterations() * 2);
}
BENCHMARK(BM_Fft2D)->Arg(32)->Arg(64)->Arg(128)->Arg(256);

// Real-time split steps of a homogeneous box with cavity feedback.
void BM_RealTimeStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  gpe::GpeModel m;
  m.atom_number = 1e4;
  m.kappa = 5.0;
  m.delta_c = -10.0;
  m.lightshift = -2e-4;
  m.coupling = 1e-3;
  m.envelopes = false;
  m.calibration = -1.0;
  const double side = 2.0 * pi * n / 8.0;
  auto psi = gpe::CondensateField::uniform(gpe::Grid2D::make(n, n, side, side), m.atom_number);
  gpe::seed_noise(psi, 1, 1e-3);
  gpe::RealTimeOptions opts;
  opts.record_every = 100;
  const auto ramp = gpe::PumpRamp::linear(1.0, 10.0, 10.0);
  for (auto _ : state) {
    auto traj = gpe::real_time_evolve(psi, ramp, m, opts);
    benchmark::DoNotOptimize(traj.steps);
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_RealTimeStep)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_OverlapIntegrals(benchmark::State& state) {
  const ExperimentParams p;
  const auto tf = boundary::thomas_fermi(p);
  for (auto _ : state) benchmark::DoNotOptimize(boundary::overlap_integrals(tf, p));
}
BENCHMARK(BM_OverlapIntegrals)->Unit(benchmark::kMillisecond);

void BM_ExactDiagonalization(benchmark::State& state) {
  dicke::DickeParams p;
  p.atom_number = static_cast<int>(state.range(0));
  p.lambda = 2.0 * *dicke::critical_coupling(p.omega, p.omega0, 0.0);
  const int cutoff = 60;
  for (auto _ : state) {
    const auto h = dicke::build_hamiltonian(p, cutoff);
    benchmark::DoNotOptimize(dicke::ground_state_observables(h, p.atom_number, cutoff));
  }
}
BENCHMARK(BM_ExactDiagonalization)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
