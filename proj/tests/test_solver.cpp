#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pilotwave/current.hpp"
#include "pilotwave/solver.hpp"
#include "support.hpp"

using namespace pilotwave;
using namespace pilotwave::testing;

namespace {

DifferentialOperator op1(std::initializer_list<std::pair<int, const char*>> terms) {
  DifferentialOperator h(1);
  for (const auto& [n, text] : terms) h.add_term(MultiIndex{n}, parse_expression(text, 1));
  return h;
}

template <typename F>
GridState sample1(const Grid& grid, F f, double t = 0.0) {
  std::vector<Complex> v(grid.size());
  std::vector<double> q(1);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    grid.coordinates(p, q);
    v[p] = f(q[0]);
  }
  return GridState(grid, v, t);
}

std::pair<double, double> mean_variance(const GridState& psi) {
  const auto rho = psi.density();
  std::vector<double> q(1);
  double mass = 0.0;
  double first = 0.0;
  double second = 0.0;
  for (std::size_t p = 0; p < rho.size(); ++p) {
    psi.grid.coordinates(p, q);
    mass += rho[p];
    first += rho[p] * q[0];
    second += rho[p] * q[0] * q[0];
  }
  const double mean = first / mass;
  return {mean, second / mass - mean * mean};
}

double max_diff(std::span<const Complex> a, std::span<const Complex> b) {
  double d = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) d = std::max(d, std::abs(a[p] - b[p]));
  return d;
}

const auto kFree = [] { return op1({{2, "-0.5"}}); };
const auto kOscillator = [] { return op1({{2, "-0.5"}, {0, "0.5*q1^2"}}); };

}  // namespace

TEST_CASE("free Gaussian spreads by the analytic law") {
  const double s0 = 0.5;
  const Grid grid = Grid::cube(1, 512, -20.0, 40.0);
  const auto psi0 = sample1(grid, [&](double x) { return std::exp(-x * x / (4 * s0 * s0)); });
  EvolutionSpec spec;
  spec.dt = 5e-4;
  spec.steps = 2000;
  spec.stride = 500;
  const auto run = evolve(kFree(), psi0, spec);
  REQUIRE(run.snapshots.size() == 5);
  CHECK(run.stability_number <= 0.5);
  for (const auto& snap : run.snapshots) {
    const double t = snap.time;
    const double expected = s0 * s0 * (1 + std::pow(t / (2 * s0 * s0), 2));
    CHECK(std::abs(mean_variance(snap).second / expected - 1.0) < 1e-3);
  }
  for (double d : run.norm_drift) CHECK(std::abs(d) < 1e-6);
}

TEST_CASE("the free-particle example step is rejected by the stability bound") {
  const Grid grid = Grid::cube(1, 512, -20.0, 40.0);
  const auto psi0 = sample1(grid, [](double x) { return std::exp(-x * x); });
  EvolutionSpec spec;
  spec.dt = 1e-3;
  spec.steps = 10;
  CHECK_THROWS_AS(evolve(kFree(), psi0, spec), StabilityError);
}

TEST_CASE("coherent state centre follows q0 cos t") {
  const double q0 = 2.0;
  const Grid grid = Grid::cube(1, 256, -10.0, 20.0);
  const auto psi0 = sample1(grid, [&](double x) { return std::exp(-(x - q0) * (x - q0) / 2); });
  EvolutionSpec spec;
  spec.dt = 5e-4;
  spec.steps = 6000;
  spec.stride = 1000;
  const auto run = evolve(kOscillator(), psi0, spec);
  for (const auto& snap : run.snapshots) CHECK(std::abs(mean_variance(snap).first - q0 * std::cos(snap.time)) < 1e-3);
}

TEST_CASE("oscillator ground state is stationary") {
  const Grid grid = Grid::cube(1, 128, -10.0, 20.0);
  const auto psi0 = sample1(grid, [](double x) { return std::exp(-x * x / 2); });
  EvolutionSpec spec;
  spec.dt = 1e-3;
  spec.steps = 1000;
  spec.stride = 1000;
  const auto run = evolve(kOscillator(), psi0, spec);
  const auto r0 = run.snapshots.front().density();
  const auto r1 = run.snapshots.back().density();
  double d = 0.0;
  for (std::size_t p = 0; p < r0.size(); ++p) d = std::max(d, std::abs(r1[p] - r0[p]));
  CHECK(d < 1e-6);
}

TEST_CASE("setup and drift errors") {
  const Grid grid = Grid::cube(1, 64, -8.0, 16.0);
  const auto psi0 = sample1(grid, [](double x) { return std::exp(-x * x); });
  EvolutionSpec spec;
  spec.dt = 1e-3;
  spec.steps = 3;
  CHECK_THROWS_AS(evolve(op1({{1, "1"}}), psi0, spec), NotHermitianError);
  spec.integrator = "euler";
  CHECK_THROWS_AS(evolve(kFree(), psi0, spec), std::invalid_argument);
  spec.integrator = "rk4";
  spec.norm_tolerance = 0.0;
  spec.steps = 200;
  CHECK_THROWS_AS(evolve(kFree(), psi0, spec), NumericalError);
}

TEST_CASE("time-dependent coefficients: plane wave phase") {
  // H = -(1+t)/2 d^2 on e^{ikx}: phase -k^2/2 (t + t^2/2).
  const Grid grid = Grid::cube(1, 32, 0.0, 2 * std::numbers::pi);
  const double k = 2.0;
  const auto psi0 = sample1(grid, [&](double x) { return std::polar(1.0, k * x); });
  EvolutionSpec spec;
  spec.dt = 1e-3;
  spec.steps = 500;
  spec.stride = 500;
  const auto run = evolve(op1({{2, "-(1+t)/2"}}), psi0, spec);
  const double T = 0.5;
  const auto exact = sample1(grid, [&](double x) { return std::polar(1.0, k * x - k * k / 2 * (T + T * T / 2)); });
  CHECK(max_diff(run.snapshots.back().values, exact.values) < 1e-8);
}

TEST_CASE("one step is linear and reversible") {
  std::mt19937_64 rng(13);
  const Grid grid = Grid::cube(2, 32, -6.0, 12.0);
  const auto h = hermitize(random_periodic_operator(rng, grid, 2));
  const GridOperator op(h, grid);
  const auto a = random_band_limited(rng, grid);
  const auto b = random_band_limited(rng, grid);
  const Complex alpha(0.3, -1.2);
  const Complex beta(-0.7, 0.4);
  std::vector<Complex> mix(grid.size());
  for (std::size_t p = 0; p < mix.size(); ++p) mix[p] = alpha * a[p] + beta * b[p];
  const double dt = 1e-3;
  const auto sa = rk4_step(op, a, 0.0, dt);
  const auto sb = rk4_step(op, b, 0.0, dt);
  const auto sm = rk4_step(op, mix, 0.0, dt);
  std::vector<Complex> combined(grid.size());
  for (std::size_t p = 0; p < mix.size(); ++p) combined[p] = alpha * sa[p] + beta * sb[p];
  CHECK(max_diff(sm, combined) < 1e-8);

  const auto back = rk4_step(op, rk4_step(op, a, 0.0, dt), dt, -dt);
  CHECK(max_diff(back, a) < 1e-9);
}

TEST_CASE("source term matches the time derivative of the density") {
  const Grid grid = Grid::cube(1, 128, -10.0, 20.0);
  const auto psi0 = sample1(grid, [](double x) { return (1.0 + x) * std::exp(-x * x / 2); });
  EvolutionSpec spec;
  spec.dt = 1e-3;
  spec.steps = 2;
  const auto run = evolve(kOscillator(), psi0, spec);
  const auto& s = run.snapshots;
  const auto source = source_term(kOscillator(), s[1], s[1].time);
  const auto r0 = s[0].density();
  const auto r2 = s[2].density();
  double err = 0.0;
  for (std::size_t p = 0; p < r0.size(); ++p) err = std::max(err, std::abs(source[p] + (r2[p] - r0[p]) / (2 * spec.dt)));
  CHECK(err < 1e-3 * max_abs(source));
}

TEST_CASE("continuity residuals") {
  SUBCASE("free Gaussian") {
    const Grid grid = Grid::cube(1, 256, -15.0, 30.0);
    const auto psi0 = sample1(grid, [](double x) { return std::exp(-x * x / 2) * std::polar(1.0, x); });
    EvolutionSpec spec;
    spec.dt = 1e-3;
    spec.steps = 4;
    const auto run = evolve(kFree(), psi0, spec);
    const auto table = derive_current_table(kFree());
    const auto r = continuity_residual(run.snapshots, [&](const GridState& s) { return eval_current(table, s, s.time); });
    CHECK(r.relative() < 1e-3);
  }
  SUBCASE("stationary state") {
    const Grid grid = Grid::cube(1, 128, -10.0, 20.0);
    const auto psi0 = sample1(grid, [](double x) { return std::exp(-x * x / 2); });
    EvolutionSpec spec;
    spec.dt = 1e-3;
    spec.steps = 2;
    const auto run = evolve(kOscillator(), psi0, spec);
    const auto table = derive_current_table(kOscillator());
    const auto r = continuity_residual(run.snapshots, [&](const GridState& s) { return eval_current(table, s, s.time); });
    CHECK(r.absolute < 1e-8);
  }
  SUBCASE("quartic packet") {
    const Grid grid = Grid::cube(1, 128, -20.0, 40.0);
    const auto psi0 = sample1(grid, [](double x) { return std::exp(-x * x / 2) * std::polar(1.0, x); });
    const auto h = op1({{4, "1"}});
    EvolutionSpec spec;
    spec.dt = 4e-5;
    spec.steps = 2;
    const auto run = evolve(h, psi0, spec);
    const auto table = derive_current_table(h);
    const auto r = continuity_residual(run.snapshots, [&](const GridState& s) { return eval_current(table, s, s.time); });
    CHECK(r.relative() < 1e-3);
  }
  CHECK_THROWS_AS(continuity_residual({}, [](const GridState& s) { return VectorField(s.grid); }), std::invalid_argument);
}

TEST_CASE("integral current of a quartic packet matches the local current") {
  const Grid grid = Grid::cube(1, 512, -20.0, 40.0);
  const auto psi0 = sample1(grid, [](double x) { return std::exp(-x * x / 8) * std::polar(1.0, 0.5 * x); });
  const auto h = op1({{4, "1"}});
  EvolutionSpec spec;
  spec.dt = 1e-7;
  spec.steps = 2000;
  spec.stride = 1000;
  const auto run = evolve(h, psi0, spec);
  REQUIRE(run.snapshots.size() == 3);
  const auto integral = current_1d_integral(run.snapshots[0], run.snapshots[2]);
  const auto local = eval_current(derive_current_table(h), run.snapshots[1], run.snapshots[1].time);
  double err = 0.0;
  for (std::size_t p = 0; p < integral.size(); ++p) err = std::max(err, std::abs(integral[p] - local.components[0][p]));
  CHECK(err < 1e-3);
}
