#include "pilotwave/altcurrent.hpp"

#include <cmath>
#include <sstream>

#include "pilotwave/kernels.hpp"
#include "pilotwave/spectral.hpp"

namespace pilotwave {

namespace {

Complex i_power(int n) {
  static const Complex cycle[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return cycle[((n % 4) + 4) % 4];
}

void check_imaginary(std::span<const Complex> values, double floor, const char* what) {
  double re = 0.0;
  double im = 0.0;
  for (const auto& v : values) {
    re = std::max(re, std::abs(v.real()));
    im = std::max(im, std::abs(v.imag()));
  }
  if (im > 1e-9 * re + floor) {
    std::ostringstream os;
    os << what << " has imaginary residue " << im << " (max real part " << re << ")";
    throw ImaginaryResidueError(os.str());
  }
}

}  // namespace

std::map<int, Expr> to_g_form(const DifferentialOperator& h) {
  if (h.dimension() != 1) throw PreconditionError("g-form is defined for one-dimensional operators");
  std::map<int, Expr> g;
  for (const auto& [n, c] : h.terms()) g.emplace(n[0], i_power(n[0]) * c);
  return g;
}

DifferentialOperator from_g_form(const std::map<int, Expr>& g) {
  DifferentialOperator h(1);
  for (const auto& [n, c] : g) {
    if (n < 0) throw std::invalid_argument("negative power of p");
    h.add_term(MultiIndex{n}, i_power(-n) * c);
  }
  return h;
}

VectorField born_jordan_current(const DifferentialOperator& h, const GridState& psi, double t) {
  if (h.dimension() != 1) throw PreconditionError("the Born-Jordan current is defined for N = 1 only");
  if (psi.grid.dimension() != 1) throw DimensionError("state must be one-dimensional");
  require_hermitian(h);
  const Grid& grid = psi.grid;
  std::vector<Complex> conj_psi(psi.values.size());
  for (std::size_t p = 0; p < conj_psi.size(); ++p) conj_psi[p] = std::conj(psi.values[p]);
  DerivativeCache dpsi(grid, psi.values);

  std::vector<Complex> total(grid.size(), Complex(0.0));
  double floor = 0.0;
  for (const auto& [order, g] : to_g_form(h)) {
    if (order == 0) continue;
    auto g_psi = sample_expression(g, grid, t);
    for (std::size_t p = 0; p < g_psi.size(); ++p) g_psi[p] *= conj_psi[p];
    DerivativeCache dg(grid, g_psi);
    for (int k = 1; k <= order; ++k) {
      const auto& a = dpsi.get(MultiIndex{order - k});
      const auto& b = dg.get(MultiIndex{k - 1});
      kernels::omp::product(total, i_power(-(order - k)) * i_power(k - 1), a, b);
      floor += 1e-12 * max_abs(a) * max_abs(b);
    }
  }
  check_imaginary(total, floor, "Born-Jordan current");
  VectorField j(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) j.components[0][p] = total[p].real();
  return j;
}

DifferentialOperator velocity_operator(const DifferentialOperator& h, std::size_t axis) {
  if (axis >= h.dimension()) throw DimensionError("axis out of range");
  DifferentialOperator v(h.dimension());
  const auto unit = MultiIndex::unit(h.dimension(), axis);
  for (const auto& [n, c] : h.terms()) {
    if (n[axis] == 0) continue;
    v.add_term(n - unit, Complex(0.0, n[axis]) * c);
  }
  return v;
}

VectorField second_order_current(const DifferentialOperator& h, const GridState& psi, double t) {
  if (h.max_order() > 2) {
    throw PreconditionError("the velocity-operator current is not valid for Hamiltonians of order above 2");
  }
  if (psi.grid.dimension() != h.dimension()) throw DimensionError("state and operator dimensions differ");
  require_hermitian(h);
  VectorField j(psi.grid);
  for (std::size_t i = 0; i < h.dimension(); ++i) {
    const auto v = velocity_operator(h, i);
    if (v.empty()) continue;
    const auto vpsi = GridOperator(v, psi.grid).apply(psi.values, t);
    std::vector<Complex> local(vpsi.size());
    for (std::size_t p = 0; p < local.size(); ++p) local[p] = std::conj(psi.values[p]) * vpsi[p];
    for (std::size_t p = 0; p < local.size(); ++p) j.components[i][p] = local[p].real();
  }
  return j;
}

FieldComparison compare_fields(const VectorField& a, const VectorField& b) {
  if (!(a.grid == b.grid) || a.components.size() != b.components.size()) {
    throw DimensionError("fields live on different grids");
  }
  VectorField diff(a.grid);
  FieldComparison out;
  for (std::size_t i = 0; i < a.components.size(); ++i) {
    for (std::size_t p = 0; p < a.grid.size(); ++p) {
      diff.components[i][p] = a.components[i][p] - b.components[i][p];
      out.max_abs_diff = std::max(out.max_abs_diff, std::abs(diff.components[i][p]));
    }
  }
  out.max_div_diff = max_abs(divergence(diff));
  return out;
}

}  // namespace pilotwave
