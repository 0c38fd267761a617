#include "pilotwave/current.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <sstream>

#include "pilotwave/kernels.hpp"
#include "pilotwave/spectral.hpp"

namespace pilotwave {

namespace {

using json = nlohmann::json;

Rational order_over_multi(const MultiIndex& n) {
  // |n|! / n!
  return Rational(factorial(n.order()), n.factorial());
}

json index_json(const MultiIndex& n) { return json(std::vector<int>(n.entries().begin(), n.entries().end())); }

MultiIndex index_from_json(const json& j) { return MultiIndex(j.get<std::vector<int>>()); }

std::string derivative_latex(const MultiIndex& n, const std::string& target) {
  std::string out;
  for (std::size_t k = 0; k < n.dimension(); ++k) {
    if (n[k] == 0) continue;
    out += "\\partial_{q_{" + std::to_string(k + 1) + "}}";
    if (n[k] > 1) out += "^{" + std::to_string(n[k]) + "}";
  }
  return out + target;
}

// Keeps the real part of `acc` in `out` after checking the discarded
// imaginary part against 1e-9 max|j| plus a rounding floor.
void take_real(std::span<const Complex> acc, std::vector<double>& out, double rounding_scale, std::size_t axis) {
  double max_re = 0.0;
  double max_im = 0.0;
  out.resize(acc.size());
  for (std::size_t p = 0; p < acc.size(); ++p) {
    out[p] = acc[p].real();
    max_re = std::max(max_re, std::abs(acc[p].real()));
    max_im = std::max(max_im, std::abs(acc[p].imag()));
  }
  const double allowed = 1e-9 * max_re + 1e-12 * rounding_scale;
  if (max_im > allowed) {
    std::ostringstream os;
    os << "current component " << axis + 1 << " has imaginary residue " << max_im << " (allowed " << allowed
       << "); the table is not real";
    throw ImaginaryResidueError(os.str());
  }
}

void check_state(const GridState& psi, std::size_t dimension) {
  if (psi.grid.dimension() != dimension) throw DimensionError("state dimension does not match");
  if (psi.values.size() != psi.grid.size()) throw DimensionError("state size does not match its grid");
}

}  // namespace

Rational direct_weight(const MultiIndex& n, const MultiIndex& m, std::size_t axis) {
  const MultiIndex k = n - m - MultiIndex::unit(n.dimension(), axis);
  Rational w = Rational(1) / order_over_multi(n) * order_over_multi(m) * order_over_multi(k);
  return m.order() % 2 ? -w : w;
}

Rational table_weight(const MultiIndex& r, const MultiIndex& n, const MultiIndex& m, std::size_t axis) {
  const MultiIndex k = r - n - MultiIndex::unit(r.dimension(), axis);
  Rational w = Rational(1) / order_over_multi(r) * order_over_multi(k) * order_over_multi(n);
  w *= Rational(binom_multi(k, m));
  return (r.order() + n.order() + 1) % 2 ? -w : w;
}

// ---------------------------------------------------------------------------

CurrentTable::CurrentTable(DifferentialOperator source, std::vector<std::map<Key, Expr>> axes)
    : source_(std::move(source)), axes_(std::move(axes)) {}

Expr CurrentTable::entry(std::size_t axis, const MultiIndex& n, const MultiIndex& m) const {
  const auto& map = axes_.at(axis);
  auto it = map.find({n, m});
  if (it == map.end()) return Expr::constant(0.0, dimension());
  return it->second;
}

bool CurrentTable::empty() const { return size() == 0; }

std::size_t CurrentTable::size() const {
  std::size_t s = 0;
  for (const auto& a : axes_) s += a.size();
  return s;
}

std::string CurrentTable::to_json() const {
  json out;
  out["dimension"] = dimension();
  json source = json::array();
  for (const auto& [n, c] : source_.terms()) source.push_back({{"n", index_json(n)}, {"expression", c.to_string()}});
  out["source"] = source;
  json axes = json::array();
  for (const auto& map : axes_) {
    json entries = json::array();
    for (const auto& [key, c] : map) {
      entries.push_back({{"n", index_json(key.first)}, {"m", index_json(key.second)}, {"expression", c.to_string()}});
    }
    axes.push_back(entries);
  }
  out["axes"] = axes;
  return out.dump(2);
}

CurrentTable CurrentTable::from_json(const std::string& text) {
  json in;
  try {
    in = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed current table: ") + e.what(), 1, 1);
  }
  try {
    const std::size_t dim = in.at("dimension").get<std::size_t>();
    DifferentialOperator source(dim);
    for (const auto& t : in.at("source")) {
      source.add_term(index_from_json(t.at("n")), parse_expression(t.at("expression").get<std::string>(), dim));
    }
    std::vector<std::map<Key, Expr>> axes;
    for (const auto& entries : in.at("axes")) {
      std::map<Key, Expr> map;
      for (const auto& e : entries) {
        map.emplace(Key{index_from_json(e.at("n")), index_from_json(e.at("m"))},
                    parse_expression(e.at("expression").get<std::string>(), dim));
      }
      axes.push_back(std::move(map));
    }
    if (axes.size() != dim) throw ParseError("current table axis count does not match dimension", 1, 1);
    return CurrentTable(std::move(source), std::move(axes));
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed current table: ") + e.what(), 1, 1);
  }
}

std::string CurrentTable::to_latex() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < dimension(); ++i) {
    os << "j_{" << i + 1 << "} &= ";
    if (axes_[i].empty()) os << "0";
    bool first = true;
    for (const auto& [key, c] : axes_[i]) {
      if (!first) os << " + ";
      first = false;
      os << "\\left(" << c.to_latex() << "\\right) " << derivative_latex(key.first, "\\psi") << "\\, "
         << derivative_latex(key.second, "\\psi^{*}");
    }
    os << " \\\\\n";
  }
  for (std::size_t i = 0; i < dimension(); ++i) {
    os << "\\dot{q}_{" << i + 1 << "} &= \\frac{j_{" << i + 1 << "}}{|\\psi|^{2}}";
    if (i + 1 < dimension()) os << " \\\\";
    os << "\n";
  }
  return os.str();
}

CurrentTable derive_current_table(const DifferentialOperator& h, const SampleSpec& spec) {
  require_hermitian(h, spec);
  const std::size_t dim = h.dimension();
  std::vector<std::map<CurrentTable::Key, Expr>> axes(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    std::map<CurrentTable::Key, Expr> sums;
    for (const auto& [r, hr] : h.terms()) {
      if (r[i] == 0) continue;
      const MultiIndex top = r - MultiIndex::unit(dim, i);
      for (const MultiIndex& n : indices_below(top)) {
        for (const MultiIndex& m : indices_below(top - n)) {
          const double w = to_double(table_weight(r, n, m, i));
          Expr piece = Expr::constant(Complex(0.0, w), dim) * hr.differentiate(top - n - m);
          if (piece.is_structural_zero()) continue;
          auto [it, inserted] = sums.try_emplace({n, m}, piece);
          if (!inserted) it->second = it->second + piece;
        }
      }
    }
    for (auto& [key, c] : sums) {
      bool zero = false;
      try {
        zero = approx_zero(c, spec);
      } catch (const std::runtime_error&) {
      }
      if (!zero) axes[i].emplace(key, std::move(c));
    }
  }
  return CurrentTable(h, std::move(axes));
}

// ---------------------------------------------------------------------------

CurrentEvaluator::CurrentEvaluator(const CurrentTable& table, const Grid& grid) : grid_(grid) {
  if (table.dimension() != grid.dimension()) throw DimensionError("current table dimension does not match grid");
  for (std::size_t i = 0; i < table.dimension(); ++i) {
    for (const auto& [key, c] : table.entries(i)) {
      Entry e{i, key.first, key.second, std::nullopt, {}, std::nullopt};
      if (auto v = c.constant_value()) {
        e.constant = *v;
      } else if (c.depends_on_time()) {
        e.compiled.emplace(c);
      } else {
        e.samples = sample_expression(c, grid, 0.0);
      }
      entries_.push_back(std::move(e));
    }
  }
}

VectorField CurrentEvaluator::operator()(std::span<const Complex> psi, double t) const {
  if (psi.size() != grid_.size()) throw DimensionError("state size does not match grid");
  const std::size_t dim = grid_.dimension();
  DerivativeCache cache(grid_, psi);
  std::vector<std::vector<Complex>> acc(dim, std::vector<Complex>(grid_.size(), Complex(0.0)));
  std::vector<double> rounding(dim, 0.0);
  for (const Entry& e : entries_) {
    const auto& dn = cache.get(e.n);
    const auto& dm = cache.get(e.m);
    double coeff_max;
    if (e.constant) {
      kernels::omp::bilinear(acc[e.axis], *e.constant, dn, dm);
      coeff_max = std::abs(*e.constant);
    } else if (e.compiled) {
      const auto samples = sample_expression(*e.compiled, grid_, t);
      kernels::omp::bilinear(acc[e.axis], samples, dn, dm);
      coeff_max = max_abs(samples);
    } else {
      kernels::omp::bilinear(acc[e.axis], e.samples, dn, dm);
      coeff_max = max_abs(e.samples);
    }
    rounding[e.axis] += coeff_max * max_abs(dn) * max_abs(dm);
  }
  VectorField out(grid_);
  for (std::size_t i = 0; i < dim; ++i) take_real(acc[i], out.components[i], rounding[i], i);
  return out;
}

VectorField eval_current(const CurrentTable& table, const GridState& psi, double t) {
  check_state(psi, table.dimension());
  return CurrentEvaluator(table, psi.grid)(psi.values, t);
}

VectorField eval_current_direct(const DifferentialOperator& h, const GridState& psi, double t,
                                const SampleSpec& spec) {
  require_hermitian(h, spec);
  const std::size_t dim = h.dimension();
  check_state(psi, dim);
  const Grid& grid = psi.grid;
  DerivativeCache dpsi(grid, psi.values);
  std::vector<std::vector<Complex>> acc(dim, std::vector<Complex>(grid.size(), Complex(0.0)));
  std::vector<double> rounding(dim, 0.0);
  for (const auto& [n, hn] : h.terms()) {
    if (n.is_zero()) continue;
    const auto coeff = sample_expression(hn, grid, t);
    std::vector<Complex> phi(grid.size());
    for (std::size_t p = 0; p < grid.size(); ++p) phi[p] = std::conj(psi.values[p]) * coeff[p];
    DerivativeCache dphi(grid, phi);
    for (std::size_t i = 0; i < dim; ++i) {
      if (n[i] == 0) continue;
      const MultiIndex top = n - MultiIndex::unit(dim, i);
      for (const MultiIndex& m : indices_below(top)) {
        const double w = to_double(direct_weight(n, m, i));
        const auto& a = dphi.get(m);
        const auto& b = dpsi.get(top - m);
        kernels::omp::product(acc[i], Complex(0.0, w), a, b);
        rounding[i] += std::abs(w) * max_abs(a) * max_abs(b);
      }
    }
  }
  VectorField out(grid);
  for (std::size_t i = 0; i < dim; ++i) take_real(acc[i], out.components[i], rounding[i], i);
  return out;
}

std::vector<double> source_term(const DifferentialOperator& h, const GridState& psi, double t) {
  check_state(psi, h.dimension());
  const GridOperator op(h, psi.grid);
  const auto hpsi = op.apply(psi.values, t);
  std::vector<double> out(hpsi.size());
  for (std::size_t p = 0; p < out.size(); ++p) {
    out[p] = 2.0 * (Complex(0.0, 1.0) * std::conj(psi.values[p]) * hpsi[p]).real();
  }
  return out;
}

double identity_residual(const GridState& phi, const GridState& chi, const MultiIndex& n) {
  if (!(phi.grid == chi.grid)) throw DimensionError("identity states live on different grids");
  check_state(phi, n.dimension());
  check_state(chi, n.dimension());
  const Grid& grid = phi.grid;
  const std::size_t dim = n.dimension();
  DerivativeCache dphi(grid, phi.values);
  DerivativeCache dchi(grid, chi.values);

  std::vector<Complex> residual(grid.size(), Complex(0.0));
  kernels::omp::product(residual, 1.0, phi.values, dchi.get(n));
  kernels::omp::product(residual, n.order() % 2 ? 1.0 : -1.0, chi.values, dphi.get(n));

  for (std::size_t i = 0; i < dim; ++i) {
    if (n[i] == 0) continue;
    const MultiIndex top = n - MultiIndex::unit(dim, i);
    std::vector<Complex> inner(grid.size(), Complex(0.0));
    for (const MultiIndex& m : indices_below(top)) {
      kernels::omp::product(inner, to_double(direct_weight(n, m, i)), dphi.get(m), dchi.get(top - m));
    }
    const auto d = spectral_derivative(grid, inner, MultiIndex::unit(dim, i));
    kernels::omp::axpy(residual, -1.0, d);
  }
  return max_abs(residual);
}

std::vector<double> current_1d_integral(const GridState& before, const GridState& after) {
  if (before.grid.dimension() != 1 || !(before.grid == after.grid)) {
    throw DimensionError("integral current needs two snapshots on the same 1D grid");
  }
  const double dt = after.time - before.time;
  if (!(dt > 0.0)) throw PreconditionError("integral current needs snapshots ordered in time");
  const auto r0 = before.density();
  const auto r1 = after.density();
  for (const auto* r : {&r0, &r1}) {
    const double peak = *std::max_element(r->begin(), r->end());
    if ((*r)[0] > 1e-12 * peak) {
      throw PreconditionError("density has not decayed at the left boundary (|psi|^2 = " + std::to_string((*r)[0]) +
                              ")");
    }
  }
  const double dx = before.grid.axis(0).spacing();
  std::vector<double> j(r0.size(), 0.0);
  double prev_rate = (r1[0] - r0[0]) / dt;
  for (std::size_t p = 1; p < j.size(); ++p) {
    const double rate = (r1[p] - r0[p]) / dt;
    j[p] = j[p - 1] - 0.5 * dx * (prev_rate + rate);
    prev_rate = rate;
  }
  return j;
}

}  // namespace pilotwave
