#ifndef PILOTWAVE_ALTCURRENT_HPP
#define PILOTWAVE_ALTCURRENT_HPP

#include <map>

#include "pilotwave/current.hpp"
#include "pilotwave/grid.hpp"
#include "pilotwave/operator.hpp"

namespace pilotwave {

/// 1D coefficients of H = sum_n g_n(q) p^n with p = -i d, so h_n = g_n (-i)^n.
std::map<int, Expr> to_g_form(const DifferentialOperator& h);
DifferentialOperator from_g_form(const std::map<int, Expr>& g);

/// Diagonal of the Born-Jordan p-derivative of rho H in position space:
///   j = sum_n sum_{k=1}^{n} [(-i d)^{n-k} psi] [(i d)^{k-1} (g_n psi*)].
/// N = 1 and Hermitian H only.
VectorField born_jordan_current(const DifferentialOperator& h, const GridState& psi, double t);

/// v_i = i [H, q_i] = i sum_n n_i h_n D^{n-e_i}.
DifferentialOperator velocity_operator(const DifferentialOperator& h, std::size_t axis);

/// j_i = Re(psi* v_i psi); order <= 2 and Hermitian H only.
VectorField second_order_current(const DifferentialOperator& h, const GridState& psi, double t);

struct FieldComparison {
  double max_abs_diff = 0.0;
  /// max |div (a - b)|, spectral.
  double max_div_diff = 0.0;
};

FieldComparison compare_fields(const VectorField& a, const VectorField& b);

}  // namespace pilotwave

#endif  // PILOTWAVE_ALTCURRENT_HPP
