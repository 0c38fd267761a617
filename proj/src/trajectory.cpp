#include "pilotwave/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <boost/random/uniform_real_distribution.hpp>

namespace pilotwave {

namespace {

// Corner indices and weights of the periodic multilinear interpolant at q.
struct Stencil {
  std::size_t count = 0;
  std::size_t index[8] = {};
  double weight[8] = {};

  double apply(std::span<const double> values) const {
    double s = 0.0;
    for (std::size_t c = 0; c < count; ++c) s += weight[c] * values[index[c]];
    return s;
  }
};

Stencil stencil(const Grid& grid, std::span<const double> q) {
  const std::size_t dim = grid.dimension();
  if (q.size() != dim) throw DimensionError("point dimension does not match the grid");
  std::size_t lo[3];
  std::size_t hi[3];
  double frac[3];
  for (std::size_t k = 0; k < dim; ++k) {
    const Axis& axis = grid.axis(k);
    if (!(q[k] >= axis.lower && q[k] < axis.lower + axis.length)) {
      std::ostringstream os;
      os << "q" << k + 1 << " = " << q[k] << " is outside [" << axis.lower << ", " << axis.lower + axis.length << ")";
      throw std::out_of_range(os.str());
    }
    const double u = (q[k] - axis.lower) / axis.spacing();
    const double base = std::floor(u);
    lo[k] = std::min(static_cast<std::size_t>(base), axis.points - 1);
    hi[k] = (lo[k] + 1) % axis.points;
    frac[k] = u - base;
  }
  Stencil s;
  s.count = std::size_t{1} << dim;
  for (std::size_t c = 0; c < s.count; ++c) {
    std::size_t flat = 0;
    double w = 1.0;
    for (std::size_t k = 0; k < dim; ++k) {
      const bool upper = (c >> k) & 1;
      flat += (upper ? hi[k] : lo[k]) * grid.stride(k);
      w *= upper ? frac[k] : 1.0 - frac[k];
    }
    s.index[c] = flat;
    s.weight[c] = w;
  }
  return s;
}

void check_in_box(const Grid& grid, std::span<const double> q) {
  for (std::size_t k = 0; k < grid.dimension(); ++k) {
    const Axis& axis = grid.axis(k);
    if (!(q[k] >= axis.lower && q[k] < axis.lower + axis.length)) {
      throw std::invalid_argument("initial ensemble has positions outside the domain box");
    }
  }
}

}  // namespace

bool Ensemble::truncated(std::size_t particle, double t) const {
  const double at = truncated_at[particle];
  return !std::isnan(at) && at <= t;
}

double Ensemble::truncated_fraction() const {
  if (count() == 0) return 0.0;
  std::size_t n = 0;
  for (double at : truncated_at) n += std::isnan(at) ? 0 : 1;
  return static_cast<double>(n) / static_cast<double>(count());
}

GuidanceField::GuidanceField(std::span<const GridState> snapshots, const CurrentTable& table) {
  if (snapshots.empty()) throw std::invalid_argument("guidance field needs at least one snapshot");
  grid_ = snapshots.front().grid;
  const CurrentEvaluator current(table, grid_);
  for (const auto& s : snapshots) {
    if (!(s.grid == grid_)) throw DimensionError("snapshots live on different grids");
    if (!times_.empty() && !(s.time > times_.back())) throw std::invalid_argument("snapshot times must increase");
    Frame f;
    f.density = s.density();
    f.peak = max_abs(f.density);
    f.current = current(s.values, s.time).components;
    times_.push_back(s.time);
    frames_.push_back(std::move(f));
  }
}

GuidanceField::GuidanceField(const GridState& psi, const VectorField& j) : grid_(psi.grid) {
  if (!(j.grid == psi.grid)) throw DimensionError("current and state live on different grids");
  Frame f;
  f.density = psi.density();
  f.peak = max_abs(f.density);
  f.current = j.components;
  times_.push_back(psi.time);
  frames_.push_back(std::move(f));
}

std::vector<double> GuidanceField::velocity(std::span<const double> q, double t) const {
  const Stencil s = stencil(grid_, q);
  std::size_t a = 0;
  double w = 0.0;
  if (frames_.size() > 1 && t > times_.front()) {
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    a = std::min(static_cast<std::size_t>(it - times_.begin()) - 1, frames_.size() - 2);
    w = std::clamp((t - times_[a]) / (times_[a + 1] - times_[a]), 0.0, 1.0);
  }
  const Frame& fa = frames_[a];
  const Frame& fb = frames_[std::min(a + 1, frames_.size() - 1)];
  const double rho = (1.0 - w) * s.apply(fa.density) + w * s.apply(fb.density);
  const double peak = (1.0 - w) * fa.peak + w * fb.peak;
  if (!(rho >= kNodeThreshold * peak) || rho == 0.0) {
    std::ostringstream os;
    os << "|psi|^2 = " << rho << " below " << kNodeThreshold << " * max |psi|^2 at t = " << t;
    throw NodeError(os.str());
  }
  std::vector<double> v(grid_.dimension());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = ((1.0 - w) * s.apply(fa.current[i]) + w * s.apply(fb.current[i])) / rho;
  }
  return v;
}

std::vector<double> velocity(const GridState& psi, const VectorField& j, std::span<const double> q) {
  return GuidanceField(psi, j).velocity(q, psi.time);
}

void wrap_into_box(const Grid& grid, std::span<double> q) {
  for (std::size_t k = 0; k < grid.dimension(); ++k) {
    const Axis& axis = grid.axis(k);
    double u = std::fmod(q[k] - axis.lower, axis.length);
    if (u < 0.0) u += axis.length;
    if (u >= axis.length) u = 0.0;
    q[k] = axis.lower + u;
  }
}

Ensemble integrate_trajectories(std::span<const GridState> snapshots, const CurrentTable& table,
                                const Ensemble& initial, const TrajectorySpec& spec) {
  return integrate_trajectories(GuidanceField(snapshots, table), initial, spec);
}

Ensemble integrate_trajectories(const GuidanceField& field, const Ensemble& initial, const TrajectorySpec& spec) {
  const Grid& grid = field.grid();
  const std::size_t dim = grid.dimension();
  if (spec.substeps < 1) throw std::invalid_argument("substeps must be at least 1");
  if (initial.dimension != dim) throw DimensionError("ensemble dimension does not match the grid");
  if (initial.frames.empty()) throw std::invalid_argument("initial ensemble has no positions");
  const double t0 = initial.times.front();
  const double tol = 1e-9 * std::max(1.0, std::abs(field.end() - field.start()));
  if (std::abs(t0 - field.start()) > tol) {
    throw std::invalid_argument("ensemble time does not match the first snapshot time");
  }
  for (std::size_t p = 0; p < initial.count(); ++p) check_in_box(grid, initial.position(0, p));

  const auto& times = field.times();
  const std::size_t frames = times.size();
  const std::size_t count = initial.count();
  Ensemble out;
  out.dimension = dim;
  out.seed = initial.seed;
  out.source = initial.source;
  out.times = times;
  out.frames.assign(frames, std::vector<double>(count * dim));
  out.frames[0] = initial.frames.front();
  out.truncated_at = initial.truncated_at;

  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t p = 0; p < n; ++p) {
    std::vector<double> q(initial.position(0, static_cast<std::size_t>(p)).begin(),
                          initial.position(0, static_cast<std::size_t>(p)).end());
    std::vector<double> stage(dim);
    bool alive = std::isnan(out.truncated_at[p]);
    // k = v(q + a * prev, t)
    auto eval = [&](const std::vector<double>& prev, double a, double t) {
      for (std::size_t k = 0; k < dim; ++k) stage[k] = q[k] + a * prev[k];
      wrap_into_box(grid, stage);
      return field.velocity(stage, t);
    };
    for (std::size_t f = 0; f + 1 < frames; ++f) {
      const double h = (times[f + 1] - times[f]) / spec.substeps;
      for (int s = 0; alive && s < spec.substeps; ++s) {
        const double t = times[f] + s * h;
        try {
          const auto k1 = eval(q, 0.0, t);
          const auto k2 = eval(k1, 0.5 * h, t + 0.5 * h);
          const auto k3 = eval(k2, 0.5 * h, t + 0.5 * h);
          const auto k4 = eval(k3, h, t + h);
          for (std::size_t k = 0; k < dim; ++k) q[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
          wrap_into_box(grid, q);
        } catch (const NodeError&) {
          out.truncated_at[p] = t;
          alive = false;
        }
      }
      std::copy(q.begin(), q.end(), out.frames[f + 1].begin() + p * dim);
    }
  }
  if (count > 0 && out.truncated_fraction() == 1.0) {
    throw NumericalError("every trajectory ran into a node of psi");
  }
  return out;
}

Ensemble sample_density(const Grid& grid, std::span<const double> rho, std::size_t count, std::uint64_t seed,
                        double time) {
  if (rho.size() != grid.size()) throw DimensionError("density size does not match grid");
  double peak = 0.0;
  for (double v : rho) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("density must be finite and non-negative");
    peak = std::max(peak, v);
  }
  if (peak == 0.0) throw std::invalid_argument("density is identically zero");

  const std::size_t dim = grid.dimension();
  Ensemble out;
  out.dimension = dim;
  out.seed = seed;
  out.times = {time};
  out.frames.assign(1, std::vector<double>(count * dim));
  out.truncated_at.assign(count, std::numeric_limits<double>::quiet_NaN());
  std::mt19937_64 rng(seed);
  boost::random::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> q(dim);
  for (std::size_t p = 0; p < count; ++p) {
    for (;;) {
      for (std::size_t k = 0; k < dim; ++k) {
        const Axis& axis = grid.axis(k);
        q[k] = axis.lower + axis.length * unit(rng);
        if (q[k] >= axis.lower + axis.length) q[k] = axis.lower;
      }
      if (unit(rng) * peak < stencil(grid, q).apply(rho)) break;
    }
    std::copy(q.begin(), q.end(), out.frames[0].begin() + p * dim);
  }
  return out;
}

double ks_distance(const Grid& grid, std::span<const double> rho, std::span<const double> positions,
                   std::size_t dimension, std::size_t axis) {
  if (rho.size() != grid.size()) throw DimensionError("density size does not match grid");
  if (dimension != grid.dimension() || axis >= dimension) throw DimensionError("axis out of range");
  if (positions.empty() || positions.size() % dimension != 0) {
    throw std::invalid_argument("positions must hold a whole number of points");
  }
  const Axis& ax = grid.axis(axis);
  const std::size_t points = ax.points;
  std::vector<double> marginal(points, 0.0);
  for (std::size_t p = 0; p < grid.size(); ++p) marginal[grid.axis_index(p, axis)] += rho[p];
  // Cumulative mass at each node of the periodic piecewise-linear interpolant.
  const double dx = ax.spacing();
  std::vector<double> cumulative(points + 1, 0.0);
  for (std::size_t k = 0; k < points; ++k) {
    cumulative[k + 1] = cumulative[k] + 0.5 * dx * (marginal[k] + marginal[(k + 1) % points]);
  }
  const double total = cumulative[points];
  if (!(total > 0.0)) throw std::invalid_argument("density is identically zero");
  auto cdf = [&](double x) {
    const double u = std::clamp((x - ax.lower) / dx, 0.0, static_cast<double>(points));
    const std::size_t k = std::min(static_cast<std::size_t>(u), points - 1);
    const double f = u - static_cast<double>(k);
    const double a = marginal[k];
    const double b = marginal[(k + 1) % points];
    return (cumulative[k] + dx * (a * f + 0.5 * (b - a) * f * f)) / total;
  };

  const std::size_t m = positions.size() / dimension;
  std::vector<double> x(m);
  for (std::size_t p = 0; p < m; ++p) x[p] = positions[p * dimension + axis];
  std::sort(x.begin(), x.end());
  double d = 0.0;
  for (std::size_t p = 0; p < m; ++p) {
    const double f = cdf(x[p]);
    d = std::max({d, static_cast<double>(p + 1) / m - f, f - static_cast<double>(p) / m});
  }
  return d;
}

double ks_distance(const Grid& grid, std::span<const double> rho, std::span<const double> positions) {
  double d = 0.0;
  for (std::size_t a = 0; a < grid.dimension(); ++a) {
    d = std::max(d, ks_distance(grid, rho, positions, grid.dimension(), a));
  }
  return d;
}

EquivarianceReport equivariance_test(const DifferentialOperator& h, const GridState& psi0,
                                     const EquivarianceSpec& spec) {
  if (spec.particles == 0) throw std::invalid_argument("equivariance test needs at least one particle");
  const auto run = evolve(h, psi0, spec.evolution);
  const auto table = derive_current_table(h);
  auto initial = sample_density(psi0.grid, psi0.density(), spec.particles, spec.seed, psi0.time);
  initial.source = "equilibrium";

  EquivarianceReport report;
  report.particles = spec.particles;
  report.final_time = run.snapshots.back().time;
  report.baseline_ks = ks_distance(psi0.grid, psi0.density(), initial.frames.front());
  if (run.snapshots.size() < 2) {
    report.ks_distance = report.baseline_ks;
    return report;
  }
  const auto ensemble = integrate_trajectories(run.snapshots, table, initial, spec.trajectory);
  report.truncated_fraction = ensemble.truncated_fraction();
  report.valid = report.truncated_fraction <= 0.1;
  std::vector<double> alive;
  for (std::size_t p = 0; p < ensemble.count(); ++p) {
    if (ensemble.truncated(p, report.final_time)) continue;
    const auto q = ensemble.position(ensemble.frames.size() - 1, p);
    alive.insert(alive.end(), q.begin(), q.end());
  }
  report.ks_distance = ks_distance(psi0.grid, run.snapshots.back().density(), alive);
  return report;
}

}  // namespace pilotwave
