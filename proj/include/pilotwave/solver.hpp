#ifndef PILOTWAVE_SOLVER_HPP
#define PILOTWAVE_SOLVER_HPP

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pilotwave/grid.hpp"
#include "pilotwave/operator.hpp"

namespace pilotwave {

class StabilityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct EvolutionSpec {
  double dt = 1e-3;
  int steps = 0;
  int stride = 1;
  std::string integrator = "rk4";
  /// Upper limit on dt * spectral_radius_estimate.
  double stability_bound = 0.5;
  /// Abort when | ||psi(t)||^2 - ||psi0||^2 | exceeds this.
  double norm_tolerance = 1e-6;
};

struct Evolution {
  /// psi0, every stride-th step, and the final step.
  std::vector<GridState> snapshots;
  /// ||psi||^2 - ||psi0||^2 for each snapshot.
  std::vector<double> norm_drift;
  /// Largest dt * spectral radius seen at setup.
  double stability_number = 0.0;
};

/// dt * spectral_radius_estimate at t0, the midpoint and the end time.
double stability_number(const GridOperator& op, const EvolutionSpec& spec, double t0);

/// One classical RK4 step of psi' = -i H psi from t to t+dt (dt may be negative).
std::vector<Complex> rk4_step(const GridOperator& op, std::span<const Complex> psi, double t, double dt);

/// Throws NotHermitianError, StabilityError, or NumericalError on norm drift.
Evolution evolve(const DifferentialOperator& h, const GridState& psi0, const EvolutionSpec& spec,
                 const SampleSpec& check = {});

struct ContinuityResidual {
  /// max |d_t rho + div j| at the middle snapshot
  double absolute = 0.0;
  /// max |d_t rho|
  double scale = 0.0;
  double relative() const { return scale > 0.0 ? absolute / scale : absolute; }
};

using CurrentProvider = std::function<VectorField(const GridState&)>;

/// Centred difference of |psi|^2 across the snapshots either side of the
/// middle one, plus the spectral divergence of the current there.  Needs at
/// least three equally spaced snapshots.
ContinuityResidual continuity_residual(std::span<const GridState> snapshots, const CurrentProvider& current);

}  // namespace pilotwave

#endif  // PILOTWAVE_SOLVER_HPP
