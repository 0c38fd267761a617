#ifndef PILOTWAVE_IO_HPP
#define PILOTWAVE_IO_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pilotwave/grid.hpp"
#include "pilotwave/operator.hpp"
#include "pilotwave/trajectory.hpp"

namespace pilotwave {

/// Hamiltonian file:
///   dim = N
///   term [n1,...,nN] = "<expression>"
/// '#' starts a comment.  Errors carry file line and column.
DifferentialOperator parse_hamiltonian(std::string_view text);
DifferentialOperator load_hamiltonian(const std::filesystem::path& path);
std::string format_hamiltonian(const DifferentialOperator& h);

/// Run settings that may come from a state file or from flags.
struct RunConfig {
  std::optional<std::vector<std::size_t>> points;
  std::optional<std::vector<std::pair<double, double>>> domain;
  std::optional<double> dt;
  std::optional<int> steps;
  std::optional<int> stride;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trajectories;
  std::optional<double> time;

  /// Fields set in `over` replace ours.
  void merge(const RunConfig& over);
};

/// "256" or "256,128"
std::vector<std::size_t> parse_points(std::string_view text);
/// "lo:hi" or "lo:hi,lo:hi"
std::vector<std::pair<double, double>> parse_domain(std::string_view text);

/// One preset term of a superposition.
struct StateComponent {
  std::string preset;
  Complex amplitude = 1.0;
  std::map<std::string, std::vector<double>> parameters;
};

/// State file: `key = value` run settings and one or more lines
///   state <gaussian|plane-wave|ho-eigenstate> [amplitude=...] [key=value|key=[a,b]]...
/// gaussian: center, width (std dev of |psi|^2), wavevector
/// plane-wave: k
/// ho-eigenstate: n, center, omega (unit mass)
struct StateSpec {
  std::vector<StateComponent> components;
  RunConfig config;
};

StateSpec parse_state_spec(std::string_view text);
StateSpec load_state_spec(const std::filesystem::path& path);

/// Per-axis values broadcast to `dimension` axes.
Grid make_grid(std::size_t dimension, const std::vector<std::size_t>& points,
               const std::vector<std::pair<double, double>>& domain);
/// Superposition sampled on the grid and normalised to unit norm.
GridState build_state(const StateSpec& spec, const Grid& grid, double t = 0.0);

/// {"time", "grid": {"axes": [{points, lower, length}]}, "values": [[re, im], ...]}
std::string snapshot_to_json(const GridState& psi);
GridState snapshot_from_json(std::string_view text);
/// Header q1..qN,re,im; one row per grid point.
std::string snapshot_to_csv(const GridState& psi);

/// {"grid": ..., "components": [[...], ...]}
std::string field_to_json(const VectorField& j);
VectorField field_from_json(std::string_view text);

/// Header t,particle_id,q1,...,qN,truncated; one row per particle per time.
std::string trajectories_to_csv(const Ensemble& ensemble);

/// |psi|^2 (marginal along q1 for N >= 2) at each snapshot as polylines.
std::string density_svg(const std::vector<GridState>& snapshots);
/// 1D: q(t) per particle.  N >= 2: paths in the (q1, q2) plane.
std::string trajectory_svg(const Ensemble& ensemble, const Grid& grid);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace pilotwave

#endif  // PILOTWAVE_IO_HPP
