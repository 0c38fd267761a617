#ifndef PILOTWAVE_GRID_HPP
#define PILOTWAVE_GRID_HPP

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "pilotwave/expr.hpp"
#include "pilotwave/multiindex.hpp"

namespace pilotwave {

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One periodic axis: `points` samples of [lower, lower+length).
struct Axis {
  std::size_t points = 0;
  double lower = 0.0;
  double length = 1.0;

  double spacing() const { return length / static_cast<double>(points); }
  double coordinate(std::size_t k) const { return lower + spacing() * static_cast<double>(k); }
  bool operator==(const Axis&) const = default;
};

/// Uniform periodic grid, row-major with the first axis slowest.
/// Point counts are powers of two in [2, 1024]; at most three axes.
class Grid {
 public:
  Grid() = default;
  explicit Grid(std::vector<Axis> axes);

  /// Same points and box on every axis.
  static Grid cube(std::size_t dimension, std::size_t points, double lower, double length);

  std::size_t dimension() const { return axes_.size(); }
  std::size_t size() const { return size_; }
  const Axis& axis(std::size_t k) const { return axes_[k]; }
  const std::vector<Axis>& axes() const { return axes_; }
  std::size_t stride(std::size_t k) const { return strides_[k]; }
  double cell_volume() const;

  /// Fills q with the coordinates of flat point `index`.
  void coordinates(std::size_t index, std::span<double> q) const;
  /// Per-axis index of flat point `index`.
  std::size_t axis_index(std::size_t index, std::size_t axis) const {
    return (index / strides_[axis]) % axes_[axis].points;
  }

  /// Angular wavenumbers of axis k in FFT order (0, 1, ..., N/2-1, -N/2, ..., -1) * 2pi/L.
  std::vector<double> wavenumbers(std::size_t k) const;
  /// pi / dx on axis k.
  double max_wavenumber(std::size_t k) const;

  bool operator==(const Grid&) const = default;

 private:
  std::vector<Axis> axes_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

/// Complex wavefunction samples psi(q, t) on a grid.
struct GridState {
  Grid grid;
  std::vector<Complex> values;
  double time = 0.0;

  GridState() = default;
  GridState(Grid g, std::vector<Complex> v, double t = 0.0);

  /// sum |psi|^2 dV
  double norm_squared() const;
  std::vector<double> density() const;
};

/// N real components j_i sampled on a grid.
struct VectorField {
  Grid grid;
  std::vector<std::vector<double>> components;

  VectorField() = default;
  explicit VectorField(const Grid& g) : grid(g), components(g.dimension(), std::vector<double>(g.size(), 0.0)) {}
  double max_abs() const;
};

/// Samples an expression at every grid point.  Evaluation faults are
/// rethrown after the parallel loop.
std::vector<Complex> sample_expression(const Expr& e, const Grid& grid, double t);
std::vector<Complex> sample_expression(const CompiledExpr& e, const Grid& grid, double t);

double max_abs(std::span<const double> values);
double max_abs(std::span<const Complex> values);

}  // namespace pilotwave

#endif  // PILOTWAVE_GRID_HPP
