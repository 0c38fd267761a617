#ifndef PILOTWAVE_OPERATOR_HPP
#define PILOTWAVE_OPERATOR_HPP

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pilotwave/expr.hpp"
#include "pilotwave/grid.hpp"
#include "pilotwave/multiindex.hpp"

namespace pilotwave {

class NotHermitianError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ResolutionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// H = sum_n h_n(q,t) D^n with finitely many non-zero complex coefficients.
///
/// Coefficients that are numerically zero (approx_zero under the pruning
/// sample spec) are never stored.
class DifferentialOperator {
 public:
  DifferentialOperator() = default;
  explicit DifferentialOperator(std::size_t dimension) : dimension_(dimension) {}
  DifferentialOperator(std::size_t dimension, const std::map<MultiIndex, Expr>& terms,
                       const SampleSpec& prune = {});

  std::size_t dimension() const { return dimension_; }
  const std::map<MultiIndex, Expr>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  /// h_n, or the zero expression when absent.
  Expr coefficient(const MultiIndex& n) const;
  /// Largest |n| over stored terms; 0 for the zero operator.
  int max_order() const;
  bool depends_on_time() const;

  /// Adds c to h_n (pruning if the sum vanishes).
  void add_term(const MultiIndex& n, const Expr& c, const SampleSpec& prune = {});

  DifferentialOperator operator+(const DifferentialOperator& other) const;
  DifferentialOperator scaled(Complex factor) const;

  /// Human-readable "h_[2] = ..." listing.
  std::string describe() const;

 private:
  std::size_t dimension_ = 0;
  std::map<MultiIndex, Expr> terms_;
};

/// Formal adjoint under the L2 pairing:
///   h^dagger_n = sum_{m >= n} (-1)^{|m|} C(m,n) D^{m-n} conj(h_m).
DifferentialOperator adjoint(const DifferentialOperator& h, const SampleSpec& prune = {});

struct SlotCheck {
  MultiIndex index;
  Expr coefficient;          // h_n
  Expr adjoint_coefficient;  // sum_{m>=n} (-1)^{|m|} C(m,n) D^{m-n} conj(h_m)
  bool ok = true;
  double max_difference = 0.0;
};

struct HermiticityReport {
  bool hermitian = true;
  std::vector<SlotCheck> slots;  // every index present on either side
  std::vector<MultiIndex> violations() const;
};

/// Coefficient-level Hermiticity test: h_n ~ h^dagger_n for every slot.
HermiticityReport check_hermiticity(const DifferentialOperator& h, const SampleSpec& spec = {});
bool is_hermitian(const DifferentialOperator& h, const SampleSpec& spec = {});
/// Throws NotHermitianError listing violated slots.
void require_hermitian(const DifferentialOperator& h, const SampleSpec& spec = {});

/// (H + H^dagger) / 2
DifferentialOperator hermitize(const DifferentialOperator& h, const SampleSpec& spec = {});

/// Minimum points per axis accepted by GridOperator::apply.
inline constexpr std::size_t kMinPointsPerAxis = 16;

/// An operator bound to a grid.  Time-independent coefficients are sampled
/// once; time-dependent ones are resampled on each call.
class GridOperator {
 public:
  GridOperator(const DifferentialOperator& h, const Grid& grid);

  const Grid& grid() const { return grid_; }
  const DifferentialOperator& op() const { return op_; }

  /// out = sum_n h_n(q,t) D^n psi, D^n spectral.
  void apply(std::span<const Complex> psi, double t, std::span<Complex> out) const;
  std::vector<Complex> apply(std::span<const Complex> psi, double t) const;

  /// sum_n max_q |h_n(q,t)| prod_k kmax_k^{n_k}; a bound on the spectral radius.
  double spectral_radius_estimate(double t) const;

 private:
  struct Term {
    MultiIndex index;
    std::optional<Complex> constant;
    std::vector<Complex> samples;  // when time independent
    std::optional<CompiledExpr> compiled;
    bool time_dependent = false;
  };
  std::vector<Complex> coefficient_samples(const Term& term, double t) const;

  DifferentialOperator op_;
  Grid grid_;
  std::vector<Term> terms_;
};

/// One-shot H psi at time t.
GridState apply(const DifferentialOperator& h, const GridState& psi, double t);

}  // namespace pilotwave

#endif  // PILOTWAVE_OPERATOR_HPP
