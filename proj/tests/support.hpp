#ifndef PILOTWAVE_TESTS_SUPPORT_HPP
#define PILOTWAVE_TESTS_SUPPORT_HPP

// Random operators and states shared by the unit and acceptance tests.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "pilotwave/expr.hpp"
#include "pilotwave/grid.hpp"
#include "pilotwave/multiindex.hpp"
#include "pilotwave/operator.hpp"

namespace pilotwave::testing {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Complex random_complex(std::mt19937_64& rng, double scale = 1.0) {
  return {uniform(rng, -scale, scale), uniform(rng, -scale, scale)};
}

inline MultiIndex random_index(std::mt19937_64& rng, std::size_t dim, int max_order) {
  const int order = std::uniform_int_distribution<int>(0, max_order)(rng);
  std::vector<int> e(dim, 0);
  for (int k = 0; k < order; ++k) e[std::uniform_int_distribution<std::size_t>(0, dim - 1)(rng)]++;
  return MultiIndex(e);
}

/// c0 + sum_k c_k q_k + c_kk q_k^2, times exp(-|q|^2/4).
inline Expr random_gaussian_coefficient(std::mt19937_64& rng, std::size_t dim) {
  Expr poly = Expr::constant(random_complex(rng), dim);
  Expr r2 = Expr::constant(0.0, dim);
  for (std::size_t k = 0; k < dim; ++k) {
    const Expr q = Expr::variable(k, dim);
    poly = poly + random_complex(rng) * q + random_complex(rng, 0.5) * q * q;
    r2 = r2 + q * q;
  }
  return poly * exp(Expr::constant(-0.25, dim) * r2);
}

/// c0 + sum_k c_k cos(2 pi q_k / L_k + phase), periodic on the grid box.
inline Expr random_periodic_coefficient(std::mt19937_64& rng, const Grid& grid, bool real = false) {
  const std::size_t dim = grid.dimension();
  auto draw = [&](double scale) { return real ? Complex(uniform(rng, -scale, scale)) : random_complex(rng, scale); };
  Expr out = Expr::constant(draw(1.0), dim);
  for (std::size_t k = 0; k < dim; ++k) {
    const double w = 2.0 * std::numbers::pi / grid.axis(k).length;
    const Expr arg = Expr::constant(w, dim) * Expr::variable(k, dim) + Expr::constant(uniform(rng, 0, 6.28), dim);
    out = out + draw(0.5) * cos(arg);
  }
  return out;
}

/// 1..4 terms of order <= max_order with coefficients from `make`; at least
/// one term has order >= 1.
template <typename Make>
DifferentialOperator random_operator(std::mt19937_64& rng, std::size_t dim, int max_order, Make make) {
  DifferentialOperator h(dim);
  const int count = std::uniform_int_distribution<int>(1, 4)(rng);
  for (int k = 0; k < count; ++k) h.add_term(random_index(rng, dim, max_order), make());
  MultiIndex lead(dim);
  while (lead.is_zero()) lead = random_index(rng, dim, max_order);
  h.add_term(lead, make());
  return h;
}

inline DifferentialOperator random_symbolic_operator(std::mt19937_64& rng, std::size_t dim, int max_order) {
  return random_operator(rng, dim, max_order, [&] { return random_gaussian_coefficient(rng, dim); });
}

inline DifferentialOperator random_periodic_operator(std::mt19937_64& rng, const Grid& grid, int max_order,
                                                     bool real = false) {
  return random_operator(rng, grid.dimension(), max_order,
                         [&] { return random_periodic_coefficient(rng, grid, real); });
}

/// A few random Fourier modes with |wave index| <= points/8 on every axis.
inline std::vector<Complex> random_band_limited(std::mt19937_64& rng, const Grid& grid, int modes = 6) {
  const std::size_t dim = grid.dimension();
  std::vector<Complex> psi(grid.size(), Complex(0.0));
  std::vector<double> q(dim);
  for (int m = 0; m < modes; ++m) {
    std::vector<double> k(dim);
    for (std::size_t a = 0; a < dim; ++a) {
      const int band = static_cast<int>(grid.axis(a).points / 8);
      k[a] = 2.0 * std::numbers::pi / grid.axis(a).length * std::uniform_int_distribution<int>(-band, band)(rng);
    }
    const Complex amp = random_complex(rng);
    for (std::size_t p = 0; p < grid.size(); ++p) {
      grid.coordinates(p, q);
      double phase = 0.0;
      for (std::size_t a = 0; a < dim; ++a) phase += k[a] * q[a];
      psi[p] += amp * std::polar(1.0, phase);
    }
  }
  return psi;
}

/// Gaussian packet exp(-|q-c|^2/(2 s^2) + i k.q), centred in the inner half of the box.
inline std::vector<Complex> random_packet(std::mt19937_64& rng, const Grid& grid) {
  const std::size_t dim = grid.dimension();
  std::vector<double> c(dim);
  std::vector<double> k(dim);
  for (std::size_t a = 0; a < dim; ++a) {
    c[a] = uniform(rng, -1.5, 1.5);
    k[a] = uniform(rng, -1.5, 1.5);
  }
  const double s = uniform(rng, 0.7, 1.2);
  std::vector<Complex> psi(grid.size());
  std::vector<double> q(dim);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    grid.coordinates(p, q);
    double r2 = 0.0;
    double phase = 0.0;
    for (std::size_t a = 0; a < dim; ++a) {
      r2 += (q[a] - c[a]) * (q[a] - c[a]);
      phase += k[a] * q[a];
    }
    psi[p] = std::exp(-r2 / (2 * s * s)) * std::polar(1.0, phase);
  }
  return psi;
}

/// sum conj(a) b dV
inline Complex inner(const Grid& grid, const std::vector<Complex>& a, const std::vector<Complex>& b) {
  Complex s = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) s += std::conj(a[p]) * b[p];
  return s * grid.cell_volume();
}

inline double l2(const Grid& grid, const std::vector<Complex>& a) { return std::sqrt(std::abs(inner(grid, a, a))); }

/// <phi, H psi> = <H phi, psi> to relative tolerance for every pair of states.
inline bool grid_symmetric(const GridOperator& op, const std::vector<std::vector<Complex>>& states, double tol) {
  const Grid& g = op.grid();
  for (const auto& phi : states) {
    const auto hphi = op.apply(phi, 0.0);
    for (const auto& psi : states) {
      const auto hpsi = op.apply(psi, 0.0);
      const Complex lhs = inner(g, phi, hpsi);
      const Complex rhs = inner(g, hphi, psi);
      const double scale = l2(g, phi) * l2(g, hpsi) + l2(g, hphi) * l2(g, psi);
      if (std::abs(lhs - rhs) > tol * scale) return false;
    }
  }
  return true;
}

}  // namespace pilotwave::testing

#endif  // PILOTWAVE_TESTS_SUPPORT_HPP
