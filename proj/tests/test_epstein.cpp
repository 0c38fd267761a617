#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pilotwave/current.hpp"
#include "pilotwave/epstein.hpp"
#include "pilotwave/spectral.hpp"
#include "support.hpp"

using namespace pilotwave;
using namespace pilotwave::testing;

namespace {

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) d = std::max(d, std::abs(a[p] - b[p]));
  return d;
}

DifferentialOperator standard(std::size_t dim) {
  DifferentialOperator h(dim);
  for (std::size_t k = 0; k < dim; ++k) h.add_term(MultiIndex::unit(dim, k) + MultiIndex::unit(dim, k), Expr::constant(-0.5, dim));
  return h;
}

GridState drifting_gaussian(const Grid& grid, std::vector<double> k) {
  std::vector<Complex> v(grid.size());
  std::vector<double> q(grid.dimension());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    grid.coordinates(p, q);
    double r2 = 0.0;
    double phase = 0.0;
    for (std::size_t a = 0; a < q.size(); ++a) {
      r2 += (q[a] - 0.5) * (q[a] - 0.5);
      phase += k[a] * q[a];
    }
    v[p] = std::exp(-r2 / 2.0) * std::polar(1.0, phase);
  }
  return GridState(grid, v);
}

// Eighth-order central second difference.
double fd_laplacian(std::size_t dim, std::vector<double> q, double h) {
  static const double c[] = {-205.0 / 72, 8.0 / 5, -1.0 / 5, 8.0 / 315, -1.0 / 560};
  double total = 0.0;
  for (std::size_t a = 0; a < dim; ++a) {
    total += c[0] * green_function(dim, q);
    for (int s = 1; s <= 4; ++s) {
      auto plus = q;
      auto minus = q;
      plus[a] += s * h;
      minus[a] -= s * h;
      total += c[s] * (green_function(dim, plus) + green_function(dim, minus));
    }
  }
  return total / (h * h);
}

}  // namespace

TEST_CASE("Green's function values") {
  const double e3[] = {1.0, 0.0, 0.0};
  CHECK(green_function(3, e3) == doctest::Approx(-1.0 / (4 * std::numbers::pi)).epsilon(1e-15));
  const double e2[] = {0.6, 0.8};
  CHECK(std::abs(green_function(2, e2)) < 1e-16);
  const double q2[] = {3.0, 4.0};
  CHECK(green_function(2, q2) == doctest::Approx(std::log(5.0) / (2 * std::numbers::pi)));
  const double q4[] = {0.0, 2.0, 0.0, 0.0};
  // Gamma(1) / (4 pi^2 |q|^2)
  CHECK(green_function(4, q4) == doctest::Approx(-1.0 / (16 * std::numbers::pi * std::numbers::pi)));
  const double zero[] = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(green_function(3, zero), std::domain_error);
  const double one[] = {1.0};
  CHECK_THROWS_AS(green_function(1, one), std::invalid_argument);
}

TEST_CASE("Green's function is harmonic away from the origin") {
  std::mt19937_64 rng(12);
  for (std::size_t dim : {2u, 3u}) {
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> q(dim);
      double r2 = 0.0;
      do {
        r2 = 0.0;
        for (auto& x : q) {
          x = uniform(rng, -2.0, 2.0);
          r2 += x * x;
        }
      } while (r2 < 1.0 || r2 > 4.0);
      worst = std::max(worst, std::abs(fd_laplacian(dim, q, 0.05)));
    }
    CAPTURE(dim);
    CHECK(worst < 1e-3);
  }
}

TEST_CASE("spectral Poisson solve") {
  const double L = 5.0;
  const Grid grid = Grid::cube(2, 32, 0.0, L);
  std::vector<double> source(grid.size());
  std::vector<double> expected(grid.size());
  std::vector<double> q(2);
  const double w = 2 * std::numbers::pi / L;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    grid.coordinates(p, q);
    source[p] = std::sin(w * q[0]);
    expected[p] = -std::sin(w * q[0]) / (w * w);
  }
  const auto sol = poisson_solve(grid, source);
  CHECK(sol.method == PoissonMethod::spectral);
  CHECK(max_diff(sol.potential, expected) < 1e-12);
  CHECK(sol.residual < 1e-9);

  const auto zero = poisson_solve(grid, std::vector<double>(grid.size(), 0.0));
  CHECK(max_abs(zero.potential) == 0.0);
  CHECK_THROWS_AS(poisson_solve(grid, std::vector<double>(grid.size(), 1.0)), SolvabilityError);
}

TEST_CASE("spectral potential has zero mean and inverts the Laplacian") {
  std::mt19937_64 rng(41);
  const Grid grid = Grid::cube(3, 16, -3.0, 6.0);
  auto z = random_band_limited(rng, grid);
  std::vector<double> f(grid.size());
  for (std::size_t p = 0; p < f.size(); ++p) f[p] = z[p].real();
  const auto source = laplacian(grid, f);
  const auto sol = poisson_solve(grid, source);
  double mean = 0.0;
  for (double v : sol.potential) mean += v;
  CHECK(std::abs(mean / grid.size()) < 1e-12);
  CHECK(sol.residual < 1e-9 * max_abs(source));
}

TEST_CASE("free-space sum inverts the Laplacian of a Gaussian") {
  // Midpoint quadrature next to the singularity is O(h^2).
  auto error = [](std::size_t dim, std::size_t points, double length) {
    const Grid grid = Grid::cube(dim, points, -length / 2, length);
    std::vector<double> g(grid.size());
    std::vector<double> source(grid.size());
    std::vector<double> q(dim);
    for (std::size_t p = 0; p < grid.size(); ++p) {
      grid.coordinates(p, q);
      double r2 = 0.0;
      for (double x : q) r2 += x * x;
      g[p] = std::exp(-r2 / 2);
      source[p] = g[p] * (r2 - static_cast<double>(dim));
    }
    const auto sol = poisson_solve_free_space(grid, source);
    CHECK(sol.method == PoissonMethod::free_space);
    return max_diff(sol.potential, g);
  };
  const double coarse = error(2, 32, 12.0);
  const double fine = error(2, 64, 12.0);
  CHECK(fine < 1e-2);
  CHECK(coarse / fine > 3.0);
  CHECK(error(3, 32, 8.0) < 1e-2);
}

TEST_CASE("nonlocal current satisfies continuity and differs from the local one") {
  const Grid grid = Grid::cube(2, 64, -8.0, 16.0);
  const auto h = standard(2);
  const auto psi = drifting_gaussian(grid, {1.0, -0.5});
  const auto source = source_term(h, psi, 0.0);
  const double scale = max_abs(source);
  const auto je = nonlocal_current(h, psi, 0.0);
  CHECK(max_diff(divergence(je), source) < 1e-8 * scale);

  const auto jl = eval_current(derive_current_table(h), psi, 0.0);
  VectorField diff(grid);
  double pointwise = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t p = 0; p < grid.size(); ++p) {
      diff.components[i][p] = jl.components[i][p] - je.components[i][p];
      pointwise = std::max(pointwise, std::abs(diff.components[i][p]));
    }
  }
  CHECK(max_abs(divergence(diff)) < 1e-8 * scale);
  // Same divergence, different fields.
  CHECK(pointwise > 1e-2 * jl.max_abs());

  CHECK_THROWS_AS(nonlocal_current(standard(1), GridState(Grid::cube(1, 16, 0, 1), std::vector<Complex>(16)), 0.0),
                  std::invalid_argument);
}

TEST_CASE("real states under a real Hamiltonian have zero nonlocal current") {
  const Grid grid = Grid::cube(2, 32, -6.0, 12.0);
  std::vector<Complex> v(grid.size());
  std::vector<double> q(2);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    grid.coordinates(p, q);
    const double g = std::exp(-(q[0] * q[0] + q[1] * q[1]) / 2);
    v[p] = g * (1.0 + q[0] * q[1]);
  }
  auto h = standard(2);
  h.add_term({0, 0}, parse_expression("0.5*(q1^2 + q2^2)", 2));
  const auto j = nonlocal_current(h, GridState(grid, v), 0.0);
  CHECK(j.max_abs() == 0.0);
}

TEST_CASE("continuity for random Hermitian operators, N = 2, 3") {
  std::mt19937_64 rng(77);
  const Grid grids[] = {Grid::cube(2, 32, -6.0, 12.0), Grid::cube(3, 16, -5.0, 10.0)};
  for (int trial = 0; trial < 10; ++trial) {
    const Grid& grid = grids[trial % 2];
    const auto h = hermitize(random_periodic_operator(rng, grid, 4));
    const GridState psi(grid, random_band_limited(rng, grid));
    const auto source = source_term(h, psi, 0.0);
    const auto je = nonlocal_current(h, psi, 0.0);
    CHECK(max_diff(divergence(je), source) < 1e-8 * max_abs(source));
    const auto jl = eval_current(derive_current_table(h), psi, 0.0);
    VectorField diff(grid);
    for (std::size_t i = 0; i < grid.dimension(); ++i) {
      for (std::size_t p = 0; p < grid.size(); ++p) diff.components[i][p] = jl.components[i][p] - je.components[i][p];
    }
    CHECK(max_abs(divergence(diff)) < 1e-8 * max_abs(source));
  }
}
