#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pilotwave/current.hpp"
#include "pilotwave/solver.hpp"
#include "pilotwave/trajectory.hpp"
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

Ensemble points1(std::vector<double> q, double t = 0.0) {
  Ensemble e;
  e.dimension = 1;
  e.times = {t};
  e.frames = {q};
  e.truncated_at.assign(q.size(), std::numeric_limits<double>::quiet_NaN());
  return e;
}

const auto kFree = [] { return op1({{2, "-0.5"}}); };
const auto kOscillator = [] { return op1({{2, "-0.5"}, {0, "0.5*q1^2"}}); };

}  // namespace

TEST_CASE("plane-wave velocities") {
  const Grid grid = Grid::cube(1, 64, 0.0, 8 * std::numbers::pi);
  SUBCASE("standard Hamiltonian") {
    const double k = 1.25;
    const auto psi = sample1(grid, [&](double x) { return std::polar(1.0, k * x); });
    const auto j = eval_current(derive_current_table(kFree()), psi, 0.0);
    for (double x : {0.0, 0.3, 7.7, 20.1}) {
      const double q[] = {x};
      CHECK(std::abs(velocity(psi, j, q)[0] - k) < 1e-12);
    }
  }
  SUBCASE("quartic Hamiltonian gives the group velocity 4k^3") {
    const auto table = derive_current_table(op1({{4, "1"}}));
    for (double k : {0.25, 0.5, 1.0}) {
      const auto psi = sample1(grid, [&](double x) { return std::polar(1.0, k * x); });
      const auto j = eval_current(table, psi, 0.0);
      for (double x : {0.1, 5.0, 13.3}) {
        const double q[] = {x};
        CAPTURE(k);
        CHECK(std::abs(velocity(psi, j, q)[0] - 4 * k * k * k) < 1e-6);
      }
    }
  }
}

TEST_CASE("velocity errors") {
  const Grid grid = Grid::cube(1, 64, -4.0, 8.0);
  const auto psi = sample1(grid, [](double x) { return x * std::exp(-x * x); });
  const auto j = eval_current(derive_current_table(kFree()), psi, 0.0);
  const double node[] = {0.0};
  CHECK_THROWS_AS(velocity(psi, j, node), NodeError);
  const double outside[] = {4.5};
  CHECK_THROWS_AS(velocity(psi, j, outside), std::out_of_range);
  const double off[] = {1.0};
  CHECK_NOTHROW(velocity(psi, j, off));
}

TEST_CASE("spreading Gaussian trajectories scale with the width") {
  const double s0 = 1.0;
  const Grid grid = Grid::cube(1, 512, -20.0, 40.0);
  const auto psi0 = sample1(grid, [&](double x) { return std::exp(-x * x / (4 * s0 * s0)); });
  EvolutionSpec spec;
  spec.dt = 5e-4;
  spec.steps = 2000;
  spec.stride = 50;
  const auto run = evolve(kFree(), psi0, spec);
  const std::vector<double> starts = {-2.0, -1.0, 0.5, 1.5, 2.5};
  const auto out = integrate_trajectories(run.snapshots, derive_current_table(kFree()), points1(starts));
  REQUIRE(out.frames.size() == run.snapshots.size());
  CHECK(out.truncated_fraction() == 0.0);
  double worst = 0.0;
  for (std::size_t f = 0; f < out.frames.size(); ++f) {
    const double t = out.times[f];
    const double ratio = std::sqrt(1 + std::pow(t / (2 * s0 * s0), 2));
    for (std::size_t p = 0; p < starts.size(); ++p) {
      worst = std::max(worst, std::abs(out.position(f, p)[0] / (starts[p] * ratio) - 1.0));
    }
  }
  CHECK(worst < 1e-2);
}

TEST_CASE("ground-state trajectories are static") {
  const Grid grid = Grid::cube(1, 128, -10.0, 20.0);
  const auto psi0 = sample1(grid, [](double x) { return std::exp(-x * x / 2); });
  EvolutionSpec spec;
  spec.dt = 1e-3;
  spec.steps = 1000;
  spec.stride = 20;
  const auto run = evolve(kOscillator(), psi0, spec);
  const auto initial = sample_density(grid, psi0.density(), 200, 5);
  const auto out = integrate_trajectories(run.snapshots, derive_current_table(kOscillator()), initial);
  double moved = 0.0;
  for (std::size_t p = 0; p < out.count(); ++p) {
    moved = std::max(moved, std::abs(out.position(out.frames.size() - 1, p)[0] - out.position(0, p)[0]));
  }
  CHECK(moved < 1e-10);
}

TEST_CASE("plane-wave-dominated packet drifts by k T") {
  const double k = 1.0;
  const Grid grid = Grid::cube(1, 256, -40.0, 80.0);
  const auto psi0 = sample1(grid, [&](double x) { return std::exp(-x * x / 100) * std::polar(1.0, k * x); });
  EvolutionSpec spec;
  spec.dt = 5e-3;
  spec.steps = 200;
  spec.stride = 10;
  const auto run = evolve(kFree(), psi0, spec);
  const auto initial = sample_density(grid, psi0.density(), 500, 9);
  const auto out = integrate_trajectories(run.snapshots, derive_current_table(kFree()), initial);
  double mean = 0.0;
  for (std::size_t p = 0; p < out.count(); ++p) mean += out.position(out.frames.size() - 1, p)[0] - out.position(0, p)[0];
  mean /= static_cast<double>(out.count());
  CHECK(std::abs(mean / (k * 1.0) - 1.0) < 1e-2);
}

TEST_CASE("1D trajectories never cross") {
  const Grid grid = Grid::cube(1, 256, -15.0, 30.0);
  const auto psi0 = sample1(grid, [](double x) {
    return std::exp(-(x + 2) * (x + 2) / 2) * std::polar(1.0, 1.5 * x) + 0.7 * std::exp(-(x - 2) * (x - 2) / 2);
  });
  EvolutionSpec spec;
  spec.dt = 1e-3;
  spec.steps = 1000;
  spec.stride = 10;
  const auto run = evolve(kFree(), psi0, spec);
  auto initial = sample_density(grid, psi0.density(), 300, 21);
  std::sort(initial.frames[0].begin(), initial.frames[0].end());
  const auto out = integrate_trajectories(run.snapshots, derive_current_table(kFree()), initial);
  bool ordered = true;
  for (const auto& frame : out.frames) ordered = ordered && std::is_sorted(frame.begin(), frame.end());
  CHECK(ordered);
}

TEST_CASE("node hits are flagged, not dropped") {
  const Grid grid = Grid::cube(1, 128, -10.0, 20.0);
  // First oscillator eigenstate: the node at 0 is stationary.
  const auto psi0 = sample1(grid, [](double x) { return x * std::exp(-x * x / 2); });
  EvolutionSpec spec;
  spec.dt = 1e-3;
  spec.steps = 100;
  spec.stride = 10;
  const auto run = evolve(kOscillator(), psi0, spec);
  const auto table = derive_current_table(kOscillator());
  const auto out = integrate_trajectories(run.snapshots, table, points1({-1.0, 0.0, 1.0}));
  CHECK(out.count() == 3);
  CHECK(out.truncated_fraction() == doctest::Approx(1.0 / 3));
  CHECK(out.truncated(1, out.times.back()));
  CHECK_FALSE(out.truncated(0, out.times.back()));
  CHECK(out.position(out.frames.size() - 1, 1)[0] == 0.0);
  CHECK_THROWS_AS(integrate_trajectories(run.snapshots, table, points1({0.0})), NumericalError);
  CHECK_THROWS_AS(integrate_trajectories(run.snapshots, table, points1({0.0}, 0.5)), std::invalid_argument);
}

TEST_CASE("sampling") {
  SUBCASE("uniform density passes KS") {
    const Grid grid = Grid::cube(2, 32, -1.0, 2.0);
    const std::size_t m = 10000;
    const std::vector<double> rho(grid.size(), 1.0);
    const auto e = sample_density(grid, rho, m, 3);
    for (std::size_t a = 0; a < 2; ++a) CHECK(ks_distance(grid, rho, e.frames[0], 2, a) < 1.63 / std::sqrt(m));
    const Grid line = Grid::cube(1, 64, 0.0, 1.0);
    const std::vector<double> flat(line.size(), 2.5);
    CHECK(ks_distance(line, flat, sample_density(line, flat, m, 4).frames[0]) < 1.63 / std::sqrt(m));
  }
  SUBCASE("one hot cell") {
    const Grid grid = Grid::cube(2, 16, 0.0, 16.0);
    std::vector<double> rho(grid.size(), 0.0);
    rho[5 * 16 + 9] = 1.0;
    const auto e = sample_density(grid, rho, 500, 8);
    bool near = true;
    for (std::size_t p = 0; p < e.count(); ++p) {
      const auto q = e.position(0, p);
      near = near && std::abs(q[0] - 5.0) <= 1.0 && std::abs(q[1] - 9.0) <= 1.0;
    }
    CHECK(near);
  }
  SUBCASE("Gaussian variance") {
    const double s = 1.3;
    const Grid grid = Grid::cube(1, 256, -10.0, 20.0);
    const auto psi = sample1(grid, [&](double x) { return std::exp(-x * x / (4 * s * s)); });
    const auto e = sample_density(grid, psi.density(), 100000, 17);
    double mean = 0.0;
    double second = 0.0;
    for (double x : e.frames[0]) {
      mean += x;
      second += x * x;
    }
    mean /= 1e5;
    CHECK(std::abs((second / 1e5 - mean * mean) / (s * s) - 1.0) < 0.05);
  }
  SUBCASE("seeded draws reproduce") {
    const Grid grid = Grid::cube(1, 64, -5.0, 10.0);
    const auto psi = sample1(grid, [](double x) { return std::exp(-x * x); });
    const auto a = sample_density(grid, psi.density(), 100, 42);
    const auto b = sample_density(grid, psi.density(), 100, 42);
    const auto c = sample_density(grid, psi.density(), 100, 43);
    CHECK(a.frames == b.frames);
    CHECK(a.frames != c.frames);
  }
  SUBCASE("errors") {
    const Grid grid = Grid::cube(1, 16, 0.0, 1.0);
    CHECK_THROWS_AS(sample_density(grid, std::vector<double>(16, 0.0), 10, 1), std::invalid_argument);
    std::vector<double> bad(16, 1.0);
    bad[3] = -1.0;
    CHECK_THROWS_AS(sample_density(grid, bad, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_density(grid, std::vector<double>(8, 1.0), 10, 1), DimensionError);
  }
}

TEST_CASE("equivariance: free Gaussian") {
  const Grid grid = Grid::cube(1, 512, -20.0, 40.0);
  const auto psi0 = sample1(grid, [](double x) { return std::exp(-x * x); });
  EquivarianceSpec spec;
  spec.particles = 5000;
  spec.seed = 2024;
  spec.evolution.dt = 5e-4;
  spec.evolution.steps = 2000;
  spec.evolution.stride = 10;
  const auto report = equivariance_test(kFree(), psi0, spec);
  CHECK(report.final_time == doctest::Approx(1.0));
  CHECK(report.ks_distance < 0.03);
  CHECK(report.truncated_fraction < 0.01);
  CHECK(report.valid);
  CHECK(report.ks_distance < 2 * report.baseline_ks);
  const auto again = equivariance_test(kFree(), psi0, spec);
  CHECK(again.ks_distance == report.ks_distance);
}

TEST_CASE("equivariance: stationary state keeps the sampler KS") {
  const Grid grid = Grid::cube(1, 128, -10.0, 20.0);
  const auto psi0 = sample1(grid, [](double x) { return std::exp(-x * x / 2); });
  EquivarianceSpec spec;
  spec.particles = 2000;
  spec.evolution.dt = 1e-3;
  spec.evolution.steps = 500;
  spec.evolution.stride = 50;
  const auto report = equivariance_test(kOscillator(), psi0, spec);
  CHECK(std::abs(report.ks_distance - report.baseline_ks) < 1e-6);
}

TEST_CASE("equivariance: quartic packet") {
  const Grid grid = Grid::cube(1, 128, -20.0, 40.0);
  const auto psi0 = sample1(grid, [](double x) { return std::exp(-x * x / 2) * std::polar(1.0, 0.5 * x); });
  EquivarianceSpec spec;
  spec.particles = 5000;
  spec.seed = 7;
  spec.evolution.dt = 4e-5;
  spec.evolution.steps = 1250;
  spec.evolution.stride = 5;
  const auto report = equivariance_test(op1({{4, "1"}}), psi0, spec);
  CHECK(report.ks_distance < 0.05);
  CHECK(report.truncated_fraction < 0.01);
  CHECK(report.ks_distance < 2 * report.baseline_ks);
}

TEST_CASE("equivariance in 2D uses marginals") {
  const Grid grid = Grid::cube(2, 64, -10.0, 20.0);
  std::vector<Complex> v(grid.size());
  std::vector<double> q(2);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    grid.coordinates(p, q);
    v[p] = std::exp(-(q[0] * q[0] + q[1] * q[1]) / 2) * std::polar(1.0, 0.8 * q[0] - 0.4 * q[1]);
  }
  DifferentialOperator h(2);
  h.add_term({2, 0}, Expr::constant(-0.5, 2));
  h.add_term({0, 2}, Expr::constant(-0.5, 2));
  EquivarianceSpec spec;
  spec.particles = 2000;
  spec.evolution.dt = 2e-3;
  spec.evolution.steps = 250;
  spec.evolution.stride = 10;
  const auto report = equivariance_test(h, GridState(grid, v), spec);
  CHECK(report.ks_distance < 2 * report.baseline_ks);
  CHECK(report.ks_distance < 1.63 / std::sqrt(2000.0) * 1.5);
}
