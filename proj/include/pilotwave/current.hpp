#ifndef PILOTWAVE_CURRENT_HPP
#define PILOTWAVE_CURRENT_HPP

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pilotwave/expr.hpp"
#include "pilotwave/grid.hpp"
#include "pilotwave/multiindex.hpp"
#include "pilotwave/operator.hpp"

namespace pilotwave {

/// The imaginary part of an evaluated current exceeded the noise floor.
class ImaginaryResidueError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Coefficients J_{i,nm} of j_i = sum_{n,m} J_{i,nm} D^n psi D^m psi*.
class CurrentTable {
 public:
  using Key = std::pair<MultiIndex, MultiIndex>;

  CurrentTable() = default;
  CurrentTable(DifferentialOperator source, std::vector<std::map<Key, Expr>> axes);

  std::size_t dimension() const { return axes_.size(); }
  const std::map<Key, Expr>& entries(std::size_t axis) const { return axes_.at(axis); }
  /// J_{axis,nm}, zero when absent.
  Expr entry(std::size_t axis, const MultiIndex& n, const MultiIndex& m) const;
  bool empty() const;
  std::size_t size() const;
  const DifferentialOperator& source() const { return source_; }

  /// {"dimension": N, "axes": [[{"n": [...], "m": [...], "expression": "..."}, ...], ...]}
  std::string to_json() const;
  static CurrentTable from_json(const std::string& text);
  /// Current components and the guidance equation dq_i/dt = j_i / |psi|^2.
  std::string to_latex() const;

 private:
  DifferentialOperator source_;
  std::vector<std::map<Key, Expr>> axes_;
};

/// Exact table from the Hamiltonian's coefficients; rejects non-Hermitian input.
CurrentTable derive_current_table(const DifferentialOperator& h, const SampleSpec& spec = {});

/// Table bound to a grid; time-independent entries are sampled once.
class CurrentEvaluator {
 public:
  CurrentEvaluator(const CurrentTable& table, const Grid& grid);
  /// Real current; throws ImaginaryResidueError if the discarded imaginary
  /// part is above 1e-9 max|j| plus a rounding floor.
  VectorField operator()(std::span<const Complex> psi, double t) const;
  const Grid& grid() const { return grid_; }

 private:
  struct Entry {
    std::size_t axis;
    MultiIndex n;
    MultiIndex m;
    std::optional<Complex> constant;
    std::vector<Complex> samples;
    std::optional<CompiledExpr> compiled;
  };
  Grid grid_;
  std::vector<Entry> entries_;
};

VectorField eval_current(const CurrentTable& table, const GridState& psi, double t);

/// Nested-sum form: no table, derivatives of psi* h_n taken on the grid.
VectorField eval_current_direct(const DifferentialOperator& h, const GridState& psi, double t,
                                const SampleSpec& spec = {});

/// I = 2 Re(i psi* H psi); d/dt |psi|^2 = -I and I = div j.
std::vector<double> source_term(const DifferentialOperator& h, const GridState& psi, double t);

/// Max norm of
///   phi D^n chi - (-1)^|n| chi D^n phi
///     - sum_i D^{e_i} sum_{m <= n-e_i} w(n,m,i) D^m phi D^{n-m-e_i} chi
/// with all derivatives spectral.
double identity_residual(const GridState& phi, const GridState& chi, const MultiIndex& n);

/// The unique 1D current vanishing at the left edge,
/// j(q) = -int_{left}^{q} d_t |psi|^2, from two snapshots by centred
/// difference and the trapezoid rule.  Valid at the midpoint time.
std::vector<double> current_1d_integral(const GridState& before, const GridState& after);

/// Weight w(n,m,i) shared by the direct form and the identity:
/// (-1)^|m| n!/|n|! |m|!/m! |n-m-e_i|!/(n-m-e_i)!.
Rational direct_weight(const MultiIndex& n, const MultiIndex& m, std::size_t axis);

/// Exact scalar multiplying i D^{r-n-m-e_i} h_r in J_{i,nm}.
Rational table_weight(const MultiIndex& r, const MultiIndex& n, const MultiIndex& m, std::size_t axis);

}  // namespace pilotwave

#endif  // PILOTWAVE_CURRENT_HPP
