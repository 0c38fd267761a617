#include "pilotwave/solver.hpp"

#include <cmath>
#include <sstream>

#include "pilotwave/kernels.hpp"
#include "pilotwave/spectral.hpp"

namespace pilotwave {

namespace {

const Complex kMinusI(0.0, -1.0);

// k = -i H (psi + a * prev)
void stage(const GridOperator& op, std::span<const Complex> psi, std::span<const Complex> prev, double a, double t,
           std::vector<Complex>& work, std::vector<Complex>& k) {
  std::copy(psi.begin(), psi.end(), work.begin());
  if (a != 0.0) kernels::omp::axpy(work, a, prev);
  op.apply(work, t, k);
  for (auto& v : k) v *= kMinusI;
}

}  // namespace

double stability_number(const GridOperator& op, const EvolutionSpec& spec, double t0) {
  const double t1 = t0 + spec.dt * spec.steps;
  double radius = op.spectral_radius_estimate(t0);
  if (op.op().depends_on_time()) {
    radius = std::max({radius, op.spectral_radius_estimate(0.5 * (t0 + t1)), op.spectral_radius_estimate(t1)});
  }
  return std::abs(spec.dt) * radius;
}

std::vector<Complex> rk4_step(const GridOperator& op, std::span<const Complex> psi, double t, double dt) {
  const std::size_t n = psi.size();
  std::vector<Complex> work(n);
  std::vector<Complex> k1(n);
  std::vector<Complex> k2(n);
  std::vector<Complex> k3(n);
  std::vector<Complex> k4(n);
  stage(op, psi, k1, 0.0, t, work, k1);
  stage(op, psi, k1, 0.5 * dt, t + 0.5 * dt, work, k2);
  stage(op, psi, k2, 0.5 * dt, t + 0.5 * dt, work, k3);
  stage(op, psi, k3, dt, t + dt, work, k4);
  std::vector<Complex> out(psi.begin(), psi.end());
  kernels::omp::axpy(out, dt / 6.0, k1);
  kernels::omp::axpy(out, dt / 3.0, k2);
  kernels::omp::axpy(out, dt / 3.0, k3);
  kernels::omp::axpy(out, dt / 6.0, k4);
  return out;
}

Evolution evolve(const DifferentialOperator& h, const GridState& psi0, const EvolutionSpec& spec,
                 const SampleSpec& check) {
  if (spec.integrator != "rk4") throw std::invalid_argument("unknown integrator '" + spec.integrator + "'");
  if (!(spec.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (spec.steps < 0) throw std::invalid_argument("steps must be non-negative");
  if (spec.stride < 1) throw std::invalid_argument("snapshot stride must be at least 1");
  require_hermitian(h, check);
  const GridOperator op(h, psi0.grid);

  Evolution out;
  out.stability_number = stability_number(op, spec, psi0.time);
  if (out.stability_number > spec.stability_bound) {
    std::ostringstream os;
    os << "dt * spectral radius = " << out.stability_number << " exceeds the stability bound " << spec.stability_bound
       << "; reduce dt below " << spec.dt * spec.stability_bound / out.stability_number;
    throw StabilityError(os.str());
  }

  const double norm0 = psi0.norm_squared();
  out.snapshots.push_back(psi0);
  out.norm_drift.push_back(0.0);
  GridState psi = psi0;
  for (int step = 1; step <= spec.steps; ++step) {
    psi.values = rk4_step(op, psi.values, psi.time, spec.dt);
    psi.time = psi0.time + step * spec.dt;
    const double drift = psi.norm_squared() - norm0;
    if (!std::isfinite(drift) || std::abs(drift) > spec.norm_tolerance) {
      std::ostringstream os;
      os << "norm drift " << drift << " at t = " << psi.time << " (step " << step << ") exceeds "
         << spec.norm_tolerance << "; the grid or time step is too coarse";
      throw NumericalError(os.str());
    }
    if (step % spec.stride == 0 || step == spec.steps) {
      out.snapshots.push_back(psi);
      out.norm_drift.push_back(drift);
    }
  }
  return out;
}

ContinuityResidual continuity_residual(std::span<const GridState> snapshots, const CurrentProvider& current) {
  if (snapshots.size() < 3) throw std::invalid_argument("continuity residual needs at least three snapshots");
  const std::size_t mid = snapshots.size() / 2;
  const GridState& before = snapshots[mid - 1];
  const GridState& here = snapshots[mid];
  const GridState& after = snapshots[mid + 1];
  const double h1 = here.time - before.time;
  const double h2 = after.time - here.time;
  if (!(h1 > 0.0) || std::abs(h1 - h2) > 1e-9 * h1) {
    throw std::invalid_argument("continuity residual needs equally spaced snapshots");
  }
  const auto r0 = before.density();
  const auto r1 = after.density();
  const auto div = divergence(current(here));
  ContinuityResidual out;
  for (std::size_t p = 0; p < r0.size(); ++p) {
    const double rate = (r1[p] - r0[p]) / (2.0 * h1);
    out.scale = std::max(out.scale, std::abs(rate));
    out.absolute = std::max(out.absolute, std::abs(rate + div[p]));
  }
  return out;
}

}  // namespace pilotwave
