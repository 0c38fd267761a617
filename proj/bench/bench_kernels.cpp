#include <benchmark/benchmark.h>

#include <omp.h>

#include <random>

#include "pilotwave/io.hpp"
#include "pilotwave/kernels.hpp"
#include "pilotwave/solver.hpp"

using namespace pilotwave;
using kernels::Complex;

namespace {

std::vector<Complex> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Complex> v(n);
  for (auto& x : v) x = {u(rng), u(rng)};
  return v;
}

template <auto Kernel>
void bm_axpy(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto coeff = random_vector(n, 1);
  const auto x = random_vector(n, 2);
  auto out = random_vector(n, 3);
  for (auto _ : state) {
    Kernel(out, coeff, x);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(3 * n * sizeof(Complex)));
}

template <auto Kernel>
void bm_bilinear(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto coeff = random_vector(n, 1);
  const auto a = random_vector(n, 2);
  const auto b = random_vector(n, 3);
  auto out = random_vector(n, 4);
  for (auto _ : state) {
    Kernel(out, coeff, a, b);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(4 * n * sizeof(Complex)));
}

template <auto Kernel>
void bm_scale_separable(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const std::vector<std::size_t> shape{side, side};
  const std::vector<std::vector<Complex>> factors{random_vector(side, 1), random_vector(side, 2)};
  auto data = random_vector(side * side, 3);
  for (auto _ : state) {
    Kernel(data, shape, factors);
    benchmark::DoNotOptimize(data.data());
  }
}

using Axpy = void (*)(std::span<Complex>, std::span<const Complex>, std::span<const Complex>);
using Bilinear = void (*)(std::span<Complex>, std::span<const Complex>, std::span<const Complex>,
                          std::span<const Complex>);
using Scale = void (*)(std::span<Complex>, std::span<const std::size_t>, const std::vector<std::vector<Complex>>&);

// Whole RK4 evolution of a 2D oscillator packet at a given thread count.
void bm_evolve(benchmark::State& state) {
  const int threads = static_cast<int>(state.range(0));
  const int saved = omp_get_max_threads();
  omp_set_num_threads(threads);
  const auto h = parse_hamiltonian("dim = 2\nterm [2,0] = \"-0.5\"\nterm [0,2] = \"-0.5\"\nterm [0,0] = \"0.5*(q1^2+q2^2)\"\n");
  const Grid grid = make_grid(2, {128}, {{-8.0, 8.0}});
  const auto psi = build_state(parse_state_spec("state gaussian center=[1,0] wavevector=[0,1]\n"), grid);
  EvolutionSpec spec;
  spec.dt = 5e-4;
  spec.steps = 20;
  spec.stride = 20;
  for (auto _ : state) benchmark::DoNotOptimize(evolve(h, psi, spec));
  omp_set_num_threads(saved);
}

}  // namespace

BENCHMARK(bm_axpy<static_cast<Axpy>(kernels::serial::axpy)>)->Name("axpy/serial")->Range(1 << 12, 1 << 20);
BENCHMARK(bm_axpy<static_cast<Axpy>(kernels::omp::axpy)>)->Name("axpy/omp")->Range(1 << 12, 1 << 20);
BENCHMARK(bm_bilinear<static_cast<Bilinear>(kernels::serial::bilinear)>)
    ->Name("bilinear/serial")
    ->Range(1 << 12, 1 << 20);
BENCHMARK(bm_bilinear<static_cast<Bilinear>(kernels::omp::bilinear)>)->Name("bilinear/omp")->Range(1 << 12, 1 << 20);
BENCHMARK(bm_scale_separable<static_cast<Scale>(kernels::serial::scale_separable)>)
    ->Name("scale_separable/serial")
    ->Range(64, 1024);
BENCHMARK(bm_scale_separable<static_cast<Scale>(kernels::omp::scale_separable)>)
    ->Name("scale_separable/omp")
    ->Range(64, 1024);
BENCHMARK(bm_evolve)->Name("evolve_2d_128/threads")->DenseRange(1, 4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
