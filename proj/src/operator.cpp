#include "pilotwave/operator.hpp"

#include <set>
#include <sstream>

#include "pilotwave/kernels.hpp"
#include "pilotwave/spectral.hpp"

namespace pilotwave {

namespace {

bool numerically_zero(const Expr& e, const SampleSpec& spec) {
  try {
    return approx_zero(e, spec);
  } catch (const std::runtime_error&) {
    // No valid sample points: keep the term rather than guess.
    return false;
  }
}

}  // namespace

DifferentialOperator::DifferentialOperator(std::size_t dimension, const std::map<MultiIndex, Expr>& terms,
                                           const SampleSpec& prune)
    : dimension_(dimension) {
  for (const auto& [n, c] : terms) add_term(n, c, prune);
}

Expr DifferentialOperator::coefficient(const MultiIndex& n) const {
  auto it = terms_.find(n);
  if (it == terms_.end()) return Expr::constant(0.0, dimension_);
  return it->second;
}

int DifferentialOperator::max_order() const {
  int m = 0;
  for (const auto& [n, c] : terms_) m = std::max(m, n.order());
  return m;
}

bool DifferentialOperator::depends_on_time() const {
  for (const auto& [n, c] : terms_) {
    if (c.depends_on_time()) return true;
  }
  return false;
}

void DifferentialOperator::add_term(const MultiIndex& n, const Expr& c, const SampleSpec& prune) {
  if (n.dimension() != dimension_) {
    throw DimensionError("term index " + n.to_string() + " does not match operator dimension " +
                         std::to_string(dimension_));
  }
  if (c.dimension() != dimension_ && !c.is_constant()) {
    throw DimensionError("coefficient dimension does not match operator dimension");
  }
  Expr sum = coefficient(n) + c;
  if (numerically_zero(sum, prune)) {
    terms_.erase(n);
  } else {
    terms_.insert_or_assign(n, sum);
  }
}

DifferentialOperator DifferentialOperator::operator+(const DifferentialOperator& other) const {
  if (other.dimension_ != dimension_) throw DimensionError("operator dimension mismatch");
  DifferentialOperator out(*this);
  for (const auto& [n, c] : other.terms_) out.add_term(n, c);
  return out;
}

DifferentialOperator DifferentialOperator::scaled(Complex factor) const {
  DifferentialOperator out(dimension_);
  if (factor == 0.0) return out;
  for (const auto& [n, c] : terms_) out.terms_.emplace(n, factor * c);
  return out;
}

std::string DifferentialOperator::describe() const {
  std::ostringstream os;
  if (terms_.empty()) os << "0\n";
  for (const auto& [n, c] : terms_) os << "h" << n.to_string() << " = " << c.to_string() << '\n';
  return os.str();
}

DifferentialOperator adjoint(const DifferentialOperator& h, const SampleSpec& prune) {
  const std::size_t dim = h.dimension();
  std::map<MultiIndex, Expr> sums;
  for (const auto& [m, hm] : h.terms()) {
    const Expr conj_hm = hm.conj();
    const double sign = (m.order() % 2 == 0) ? 1.0 : -1.0;
    for (const MultiIndex& n : indices_below(m)) {
      const double weight = sign * binom_multi(m, n).convert_to<double>();
      Expr piece = Expr::constant(weight, dim) * conj_hm.differentiate(m - n);
      if (piece.is_structural_zero()) continue;
      auto it = sums.find(n);
      if (it == sums.end()) {
        sums.emplace(n, piece);
      } else {
        it->second = it->second + piece;
      }
    }
  }
  return DifferentialOperator(dim, sums, prune);
}

std::vector<MultiIndex> HermiticityReport::violations() const {
  std::vector<MultiIndex> out;
  for (const auto& s : slots) {
    if (!s.ok) out.push_back(s.index);
  }
  return out;
}

HermiticityReport check_hermiticity(const DifferentialOperator& h, const SampleSpec& spec) {
  const DifferentialOperator adj = adjoint(h, spec);
  std::set<MultiIndex> slots;
  for (const auto& [n, c] : h.terms()) slots.insert(n);
  for (const auto& [n, c] : adj.terms()) slots.insert(n);

  HermiticityReport report;
  for (const MultiIndex& n : slots) {
    SlotCheck check{n, h.coefficient(n), adj.coefficient(n)};
    try {
      check.ok = approx_equal(check.coefficient, check.adjoint_coefficient, spec);
      check.max_difference = max_sampled_difference(check.coefficient, check.adjoint_coefficient, spec);
    } catch (const std::runtime_error&) {
      check.ok = false;
      check.max_difference = std::numeric_limits<double>::infinity();
    }
    report.hermitian = report.hermitian && check.ok;
    report.slots.push_back(std::move(check));
  }
  return report;
}

bool is_hermitian(const DifferentialOperator& h, const SampleSpec& spec) {
  return check_hermiticity(h, spec).hermitian;
}

void require_hermitian(const DifferentialOperator& h, const SampleSpec& spec) {
  const auto report = check_hermiticity(h, spec);
  if (report.hermitian) return;
  std::string slots;
  for (const auto& n : report.violations()) slots += " " + n.to_string();
  throw NotHermitianError("operator is not Hermitian; violated coefficient slots:" + slots);
}

DifferentialOperator hermitize(const DifferentialOperator& h, const SampleSpec& spec) {
  const DifferentialOperator adj = adjoint(h, spec);
  std::set<MultiIndex> slots;
  for (const auto& [n, c] : h.terms()) slots.insert(n);
  for (const auto& [n, c] : adj.terms()) slots.insert(n);
  std::map<MultiIndex, Expr> sym;
  for (const MultiIndex& n : slots) {
    sym.emplace(n, Expr::constant(0.5, h.dimension()) * (h.coefficient(n) + adj.coefficient(n)));
  }
  return DifferentialOperator(h.dimension(), sym, spec);
}

// ---------------------------------------------------------------------------

GridOperator::GridOperator(const DifferentialOperator& h, const Grid& grid) : op_(h), grid_(grid) {
  if (h.dimension() != grid.dimension()) throw DimensionError("operator dimension does not match grid");
  for (std::size_t k = 0; k < grid.dimension(); ++k) {
    if (grid.axis(k).points < kMinPointsPerAxis) {
      throw ResolutionError("operator application needs at least " + std::to_string(kMinPointsPerAxis) +
                            " points per axis");
    }
  }
  for (const auto& [n, c] : h.terms()) {
    Term term;
    term.index = n;
    if (auto v = c.constant_value()) {
      term.constant = *v;
    } else if (c.depends_on_time()) {
      term.time_dependent = true;
      term.compiled.emplace(c);
    } else {
      term.samples = sample_expression(c, grid, 0.0);
    }
    terms_.push_back(std::move(term));
  }
}

std::vector<Complex> GridOperator::coefficient_samples(const Term& term, double t) const {
  if (term.constant) return std::vector<Complex>(grid_.size(), *term.constant);
  if (term.time_dependent) return sample_expression(*term.compiled, grid_, t);
  return term.samples;
}

void GridOperator::apply(std::span<const Complex> psi, double t, std::span<Complex> out) const {
  if (psi.size() != grid_.size() || out.size() != grid_.size()) throw DimensionError("state size does not match grid");
  std::fill(out.begin(), out.end(), Complex(0.0));
  if (terms_.empty()) return;
  DerivativeCache cache(grid_, psi);
  for (const Term& term : terms_) {
    const auto& d = cache.get(term.index);
    if (term.constant) {
      kernels::omp::axpy(out, *term.constant, d);
    } else if (term.time_dependent) {
      const auto h = sample_expression(*term.compiled, grid_, t);
      kernels::omp::axpy(out, h, d);
    } else {
      kernels::omp::axpy(out, term.samples, d);
    }
  }
}

std::vector<Complex> GridOperator::apply(std::span<const Complex> psi, double t) const {
  std::vector<Complex> out(grid_.size());
  apply(psi, t, out);
  return out;
}

double GridOperator::spectral_radius_estimate(double t) const {
  double total = 0.0;
  for (const Term& term : terms_) {
    double coeff_max = term.constant ? std::abs(*term.constant) : max_abs(coefficient_samples(term, t));
    double kfactor = 1.0;
    for (std::size_t k = 0; k < grid_.dimension(); ++k) {
      kfactor *= std::pow(grid_.max_wavenumber(k), term.index[k]);
    }
    total += coeff_max * kfactor;
  }
  return total;
}

GridState apply(const DifferentialOperator& h, const GridState& psi, double t) {
  GridOperator op(h, psi.grid);
  return GridState(psi.grid, op.apply(psi.values, t), psi.time);
}

}  // namespace pilotwave
