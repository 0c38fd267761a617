#ifndef PILOTWAVE_SPECTRAL_HPP
#define PILOTWAVE_SPECTRAL_HPP

#include <map>
#include <memory>
#include <span>
#include <vector>

#include "pilotwave/grid.hpp"
#include "pilotwave/multiindex.hpp"

namespace pilotwave {

/// Forward/backward N-d discrete Fourier transforms for one grid shape.
/// Plans are created once per shape and shared; execution is thread safe.
class FourierTransform {
 public:
  static const FourierTransform& for_grid(const Grid& grid);

  void forward(std::span<const Complex> in, std::span<Complex> out) const;
  /// Inverse transform including the 1/size normalisation.
  void backward(std::span<const Complex> in, std::span<Complex> out) const;

  ~FourierTransform();
  FourierTransform(const FourierTransform&) = delete;
  FourierTransform& operator=(const FourierTransform&) = delete;

 private:
  explicit FourierTransform(const Grid& grid);
  std::size_t size_;
  void* forward_plan_;
  void* backward_plan_;
};

/// Per-axis multipliers (i k)^n for a spectral derivative of order n.  For
/// odd n the Nyquist mode is dropped, so odd derivatives of real data stay
/// real and the first-derivative matrix is skew-Hermitian.
std::vector<Complex> derivative_multipliers(const Grid& grid, std::size_t axis, int order);

/// Spectral mixed partial D^n of periodic samples.
std::vector<Complex> spectral_derivative(const Grid& grid, std::span<const Complex> values,
                                         const MultiIndex& n);
std::vector<double> spectral_derivative(const Grid& grid, std::span<const double> values,
                                        const MultiIndex& n);

/// Transforms the samples once and serves any number of derivatives D^n.
class DerivativeCache {
 public:
  DerivativeCache(const Grid& grid, std::span<const Complex> values);
  const std::vector<Complex>& get(const MultiIndex& n);
  const Grid& grid() const { return grid_; }

 private:
  Grid grid_;
  std::vector<Complex> spectrum_;
  std::map<MultiIndex, std::vector<Complex>> cache_;
};

/// sum_i d_i field_i
std::vector<double> divergence(const VectorField& field);
std::vector<double> gradient_component(const Grid& grid, std::span<const double> values, std::size_t axis);
std::vector<double> laplacian(const Grid& grid, std::span<const double> values);

}  // namespace pilotwave

#endif  // PILOTWAVE_SPECTRAL_HPP
