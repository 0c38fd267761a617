#include <doctest.h>

#include <omp.h>

#include "pilotwave/current.hpp"
#include "pilotwave/io.hpp"
#include "pilotwave/kernels.hpp"
#include "pilotwave/solver.hpp"
#include "pilotwave/trajectory.hpp"
#include "support.hpp"

using namespace pilotwave;
using namespace pilotwave::testing;

namespace {

std::vector<Complex> random_vector(std::mt19937_64& rng, std::size_t n) {
  std::vector<Complex> v(n);
  for (auto& x : v) x = random_complex(rng);
  return v;
}

// Restores the thread count on scope exit.
struct Threads {
  int saved = omp_get_max_threads();
  explicit Threads(int n) { omp_set_num_threads(n); }
  ~Threads() { omp_set_num_threads(saved); }
};

}  // namespace

TEST_CASE("parallel kernels match the serial reference bit for bit") {
  std::mt19937_64 rng(42);
  for (std::size_t n : {1u, 7u, 1000u, 1u << 16}) {
    const auto a = random_vector(rng, n);
    const auto b = random_vector(rng, n);
    const auto coeff = random_vector(rng, n);
    const auto init = random_vector(rng, n);
    const Complex c(0.3, -1.7);

    auto s = init, p = init;
    kernels::serial::axpy(s, c, a);
    kernels::omp::axpy(p, c, a);
    CHECK(s == p);
    kernels::serial::axpy(s, coeff, a);
    kernels::omp::axpy(p, coeff, a);
    CHECK(s == p);
    kernels::serial::bilinear(s, c, a, b);
    kernels::omp::bilinear(p, c, a, b);
    CHECK(s == p);
    kernels::serial::bilinear(s, coeff, a, b);
    kernels::omp::bilinear(p, coeff, a, b);
    CHECK(s == p);
    kernels::serial::product(s, c, a, b);
    kernels::omp::product(p, c, a, b);
    CHECK(s == p);
  }

  const std::vector<std::size_t> shape{8, 16, 32};
  std::vector<std::vector<Complex>> factors;
  for (std::size_t k : shape) factors.push_back(random_vector(rng, k));
  auto s = random_vector(rng, 8 * 16 * 32);
  auto p = s;
  kernels::serial::scale_separable(s, shape, factors);
  kernels::omp::scale_separable(p, shape, factors);
  CHECK(s == p);
}

TEST_CASE("results do not depend on the thread count") {
  const auto h = parse_hamiltonian("dim = 2\nterm [2,0] = \"-0.5\"\nterm [0,2] = \"-0.5\"\nterm [0,0] = \"0.5*(q1^2+q2^2)\"\n");
  const Grid grid = make_grid(2, {32}, {{-6.0, 6.0}});
  const auto psi = build_state(parse_state_spec("state gaussian center=[1,0] width=[0.8,1] wavevector=[0,1]\n"), grid);
  EvolutionSpec spec;
  spec.dt = 4e-3;
  spec.steps = 50;
  spec.stride = 10;
  const auto table = derive_current_table(h);

  auto run = [&](int threads) {
    Threads guard(threads);
    const auto evolution = evolve(h, psi, spec);
    const auto j = eval_current(table, evolution.snapshots.back(), evolution.snapshots.back().time);
    const auto initial = sample_density(grid, psi.density(), 200, 5);
    const auto ensemble = integrate_trajectories(evolution.snapshots, table, initial);
    return std::tuple(evolution.snapshots.back().values, j.components, ensemble.frames);
  };
  const auto one = run(1);
  const auto many = run(std::max(4, kernels::max_threads()));
  CHECK(std::get<0>(one) == std::get<0>(many));
  CHECK(std::get<1>(one) == std::get<1>(many));
  CHECK(std::get<2>(one) == std::get<2>(many));
}
