#ifndef PILOTWAVE_EPSTEIN_HPP
#define PILOTWAVE_EPSTEIN_HPP

#include <span>
#include <stdexcept>
#include <vector>

#include "pilotwave/grid.hpp"
#include "pilotwave/operator.hpp"

namespace pilotwave {

/// The periodic Poisson problem has no solution for a source with non-zero mean.
class SolvabilityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Fundamental solution of Laplace's equation, lap G = delta:
/// log|q| / 2pi for N = 2, -Gamma(N/2-1) / (4 pi^{N/2} |q|^{N-2}) for N >= 3.
double green_function(std::size_t dimension, std::span<const double> q);

enum class PoissonMethod { spectral, free_space };

struct PoissonSolution {
  Grid grid;
  std::vector<double> potential;
  PoissonMethod method = PoissonMethod::spectral;
  /// max |lap potential - source| (spectral method only; NaN otherwise)
  double residual = 0.0;
};

/// Zero-mean periodic solution of lap phi = source by dividing Fourier modes by -|k|^2.
PoissonSolution poisson_solve(const Grid& grid, std::span<const double> source);

/// phi(q) = sum_q' G(q-q') source(q') dV over the grid box treated as a
/// subset of R^N; the singular self cell is integrated by sub-cell midpoints.
/// O(size^2); for validating the Green's function in N = 2, 3.
PoissonSolution poisson_solve_free_space(const Grid& grid, std::span<const double> source);

/// j = grad(lap^{-1} I) with I the source term of H; div j = I.
VectorField nonlocal_current(const DifferentialOperator& h, const GridState& psi, double t,
                             const SampleSpec& spec = {});

}  // namespace pilotwave

#endif  // PILOTWAVE_EPSTEIN_HPP
