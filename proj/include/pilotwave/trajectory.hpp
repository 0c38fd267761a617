#ifndef PILOTWAVE_TRAJECTORY_HPP
#define PILOTWAVE_TRAJECTORY_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pilotwave/current.hpp"
#include "pilotwave/grid.hpp"
#include "pilotwave/solver.hpp"

namespace pilotwave {

/// The guidance velocity was requested where |psi|^2 < 1e-10 max |psi|^2.
class NodeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

inline constexpr double kNodeThreshold = 1e-10;

/// M configurations in R^N recorded at a sequence of times.
struct Ensemble {
  std::size_t dimension = 0;
  std::uint64_t seed = 0;
  /// "equilibrium" for |psi0|^2 draws, "user" otherwise.
  std::string source = "user";
  std::vector<double> times;
  /// frames[f][particle * dimension + axis]
  std::vector<std::vector<double>> frames;
  /// Time at which a particle hit a node, or NaN if it never did.
  std::vector<double> truncated_at;

  std::size_t count() const { return truncated_at.size(); }
  std::span<const double> position(std::size_t frame, std::size_t particle) const {
    return std::span<const double>(frames[frame]).subspan(particle * dimension, dimension);
  }
  bool truncated(std::size_t particle, double t) const;
  double truncated_fraction() const;
};

/// Density and current on the grid at each snapshot time, interpolated
/// multilinearly in space (periodic) and linearly in time.
class GuidanceField {
 public:
  GuidanceField(std::span<const GridState> snapshots, const CurrentTable& table);
  GuidanceField(const GridState& psi, const VectorField& j);

  const Grid& grid() const { return grid_; }
  double start() const { return times_.front(); }
  double end() const { return times_.back(); }
  const std::vector<double>& times() const { return times_; }

  /// j(q,t) / |psi(q,t)|^2; throws NodeError near nodes and
  /// std::out_of_range outside the box.
  std::vector<double> velocity(std::span<const double> q, double t) const;

 private:
  struct Frame {
    std::vector<double> density;
    std::vector<std::vector<double>> current;
    double peak = 0.0;
  };
  Grid grid_;
  std::vector<double> times_;
  std::vector<Frame> frames_;
};

std::vector<double> velocity(const GridState& psi, const VectorField& j, std::span<const double> q);

/// Maps q into the periodic box [lower, lower+length) on every axis.
void wrap_into_box(const Grid& grid, std::span<double> q);

struct TrajectorySpec {
  /// RK4 steps per snapshot interval.
  int substeps = 4;
};

/// RK4 integration of dq/dt = j/|psi|^2 from the first to the last snapshot,
/// recording positions at every snapshot time.  Particles that hit a node are
/// frozen and flagged; throws NumericalError if all of them do.
Ensemble integrate_trajectories(std::span<const GridState> snapshots, const CurrentTable& table,
                                const Ensemble& initial, const TrajectorySpec& spec = {});
Ensemble integrate_trajectories(const GuidanceField& field, const Ensemble& initial, const TrajectorySpec& spec = {});

/// M rejection-sampled draws from the multilinear interpolant of rho.
Ensemble sample_density(const Grid& grid, std::span<const double> rho, std::size_t count, std::uint64_t seed,
                        double time = 0.0);

/// Kolmogorov-Smirnov distance between the samples along `axis` and the
/// marginal of the multilinear interpolant of rho.
double ks_distance(const Grid& grid, std::span<const double> rho, std::span<const double> positions,
                   std::size_t dimension, std::size_t axis);
/// 1D: full KS.  N >= 2: largest marginal KS over the axes.
double ks_distance(const Grid& grid, std::span<const double> rho, std::span<const double> positions);

struct EquivarianceReport {
  double ks_distance = 0.0;
  /// KS of the initial draw against |psi0|^2.
  double baseline_ks = 0.0;
  double truncated_fraction = 0.0;
  std::size_t particles = 0;
  double final_time = 0.0;
  /// False when more than 10% of the particles were truncated.
  bool valid = true;
};

struct EquivarianceSpec {
  std::size_t particles = 5000;
  std::uint64_t seed = 1;
  EvolutionSpec evolution;
  TrajectorySpec trajectory;
};

/// Samples |psi0|^2, evolves psi and the particles to steps * dt, and compares
/// the final positions with |psi(T)|^2.
EquivarianceReport equivariance_test(const DifferentialOperator& h, const GridState& psi0,
                                     const EquivarianceSpec& spec);

}  // namespace pilotwave

#endif  // PILOTWAVE_TRAJECTORY_HPP
