#include "pilotwave/grid.hpp"

#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <string>

namespace pilotwave {

namespace {
bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }
}  // namespace

Grid::Grid(std::vector<Axis> axes) : axes_(std::move(axes)) {
  if (axes_.empty() || axes_.size() > 3) {
    throw DimensionError("grids support 1 to 3 axes, got " + std::to_string(axes_.size()));
  }
  for (const Axis& a : axes_) {
    if (!is_power_of_two(a.points) || a.points > 1024) {
      throw std::invalid_argument("grid point counts must be powers of two in [2, 1024], got " +
                                  std::to_string(a.points));
    }
    if (!(a.length > 0.0) || !std::isfinite(a.length) || !std::isfinite(a.lower)) {
      throw std::invalid_argument("grid axis length must be positive and finite");
    }
  }
  strides_.assign(axes_.size(), 1);
  for (std::size_t k = axes_.size(); k-- > 1;) strides_[k - 1] = strides_[k] * axes_[k].points;
  size_ = strides_[0] * axes_[0].points;
}

Grid Grid::cube(std::size_t dimension, std::size_t points, double lower, double length) {
  return Grid(std::vector<Axis>(dimension, Axis{points, lower, length}));
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (const Axis& a : axes_) v *= a.spacing();
  return v;
}

void Grid::coordinates(std::size_t index, std::span<double> q) const {
  for (std::size_t k = 0; k < axes_.size(); ++k) q[k] = axes_[k].coordinate(axis_index(index, k));
}

std::vector<double> Grid::wavenumbers(std::size_t k) const {
  const Axis& a = axes_.at(k);
  const std::size_t n = a.points;
  std::vector<double> out(n);
  const double base = 2.0 * std::numbers::pi / a.length;
  for (std::size_t j = 0; j < n; ++j) {
    const long m = j < n / 2 ? static_cast<long>(j) : static_cast<long>(j) - static_cast<long>(n);
    out[j] = base * static_cast<double>(m);
  }
  return out;
}

double Grid::max_wavenumber(std::size_t k) const { return std::numbers::pi / axes_.at(k).spacing(); }

GridState::GridState(Grid g, std::vector<Complex> v, double t) : grid(std::move(g)), values(std::move(v)), time(t) {
  if (values.size() != grid.size()) throw DimensionError("grid state size does not match its grid");
}

double GridState::norm_squared() const {
  double sum = 0.0;
  for (const Complex& z : values) sum += std::norm(z);
  return sum * grid.cell_volume();
}

std::vector<double> GridState::density() const {
  std::vector<double> rho(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) rho[k] = std::norm(values[k]);
  return rho;
}

double VectorField::max_abs() const {
  double m = 0.0;
  for (const auto& c : components) m = std::max(m, pilotwave::max_abs(c));
  return m;
}

std::vector<Complex> sample_expression(const Expr& e, const Grid& grid, double t) {
  if (e.dimension() != grid.dimension() && !(e.is_constant())) {
    throw DimensionError("expression dimension does not match the grid");
  }
  if (auto c = e.constant_value()) return std::vector<Complex>(grid.size(), *c);
  return sample_expression(CompiledExpr(e), grid, t);
}

std::vector<Complex> sample_expression(const CompiledExpr& e, const Grid& grid, double t) {
  std::vector<Complex> out(grid.size());
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto n = static_cast<std::ptrdiff_t>(grid.size());
#pragma omp parallel
  {
    std::vector<double> q(grid.dimension());
    std::vector<Complex> scratch(e.stack_size());
#pragma omp for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
      try {
        grid.coordinates(static_cast<std::size_t>(k), q);
        out[static_cast<std::size_t>(k)] = e.evaluate(q, t, scratch);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

double max_abs(std::span<const double> values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double max_abs(std::span<const Complex> values) {
  double m = 0.0;
  for (const Complex& v : values) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace pilotwave
