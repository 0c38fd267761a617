#include "pilotwave/epstein.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "pilotwave/current.hpp"
#include "pilotwave/spectral.hpp"

namespace pilotwave {

namespace {

constexpr int kSubcells = 8;

double norm(std::span<const double> q) {
  double r2 = 0.0;
  for (double x : q) r2 += x * x;
  return std::sqrt(r2);
}

// Average of G over the cell centred at the origin, by kSubcells^N midpoints.
double self_cell_average(const Grid& grid) {
  const std::size_t dim = grid.dimension();
  std::size_t count = 1;
  for (std::size_t k = 0; k < dim; ++k) count *= kSubcells;
  std::vector<double> q(dim);
  double sum = 0.0;
  for (std::size_t s = 0; s < count; ++s) {
    std::size_t rest = s;
    for (std::size_t k = 0; k < dim; ++k) {
      const double h = grid.axis(k).spacing();
      q[k] = (static_cast<double>(rest % kSubcells) + 0.5) / kSubcells * h - 0.5 * h;
      rest /= kSubcells;
    }
    sum += green_function(dim, q);
  }
  return sum / static_cast<double>(count);
}

}  // namespace

double green_function(std::size_t dimension, std::span<const double> q) {
  if (dimension < 2) throw std::invalid_argument("Green's function is defined for N >= 2");
  if (q.size() != dimension) throw DimensionError("point dimension does not match N");
  const double r = norm(q);
  if (r == 0.0) throw std::domain_error("Green's function is singular at q = 0");
  if (dimension == 2) return std::log(r) / (2.0 * std::numbers::pi);
  const double n = static_cast<double>(dimension);
  return -std::tgamma(n / 2.0 - 1.0) / (4.0 * std::pow(std::numbers::pi, n / 2.0) * std::pow(r, n - 2.0));
}

PoissonSolution poisson_solve(const Grid& grid, std::span<const double> source) {
  if (source.size() != grid.size()) throw DimensionError("source size does not match grid");
  const double peak = max_abs(source);
  const double mean = std::accumulate(source.begin(), source.end(), 0.0) / static_cast<double>(source.size());
  if (std::abs(mean) > 1e-10 * peak) {
    std::ostringstream os;
    os << "Poisson source has non-zero mean " << mean << " (max |source| " << peak
       << "); no periodic solution exists";
    throw SolvabilityError(os.str());
  }

  const auto& fft = FourierTransform::for_grid(grid);
  std::vector<Complex> spectrum(source.begin(), source.end());
  fft.forward(spectrum, spectrum);
  const std::size_t dim = grid.dimension();
  std::vector<std::vector<double>> k2(dim);
  for (std::size_t a = 0; a < dim; ++a) {
    for (double k : grid.wavenumbers(a)) k2[a].push_back(k * k);
  }
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(grid.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < n; ++p) {
    double total = 0.0;
    for (std::size_t a = 0; a < dim; ++a) total += k2[a][grid.axis_index(static_cast<std::size_t>(p), a)];
    spectrum[p] = total == 0.0 ? Complex(0.0) : spectrum[p] / -total;
  }
  fft.backward(spectrum, spectrum);

  PoissonSolution out;
  out.grid = grid;
  out.method = PoissonMethod::spectral;
  out.potential.resize(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) out.potential[p] = spectrum[p].real();
  const auto lap = laplacian(grid, out.potential);
  for (std::size_t p = 0; p < grid.size(); ++p) out.residual = std::max(out.residual, std::abs(lap[p] - source[p]));
  if (peak > 0.0 && out.residual > 1e-9 * peak) {
    throw NumericalError("spectral Poisson residual " + std::to_string(out.residual) + " above tolerance");
  }
  return out;
}

PoissonSolution poisson_solve_free_space(const Grid& grid, std::span<const double> source) {
  if (source.size() != grid.size()) throw DimensionError("source size does not match grid");
  const std::size_t dim = grid.dimension();
  if (dim < 2 || dim > 3) throw std::invalid_argument("free-space Poisson sum supports N = 2, 3");

  // G depends only on the index offset between points: tabulate it once over
  // offsets in (-points, points) per axis.
  std::vector<std::size_t> extent(dim);
  std::vector<std::size_t> stride(dim, 1);
  std::size_t table_size = 1;
  for (std::size_t k = 0; k < dim; ++k) {
    extent[k] = 2 * grid.axis(k).points - 1;
    table_size *= extent[k];
  }
  for (std::size_t k = dim; k-- > 1;) stride[k - 1] = stride[k] * extent[k];
  std::vector<double> kernel(table_size);
  const double self = self_cell_average(grid);
  {
    std::vector<double> d(dim);
    for (std::size_t e = 0; e < table_size; ++e) {
      bool origin = true;
      for (std::size_t k = 0; k < dim; ++k) {
        const long offset = static_cast<long>((e / stride[k]) % extent[k]) - static_cast<long>(grid.axis(k).points - 1);
        d[k] = static_cast<double>(offset) * grid.axis(k).spacing();
        origin = origin && offset == 0;
      }
      kernel[e] = origin ? self : green_function(dim, d);
    }
  }

  PoissonSolution out;
  out.grid = grid;
  out.method = PoissonMethod::free_space;
  out.residual = std::numeric_limits<double>::quiet_NaN();
  out.potential.assign(grid.size(), 0.0);
  const double dv = grid.cell_volume();
  std::vector<std::size_t> offset(grid.size(), 0);
  for (std::size_t b = 0; b < grid.size(); ++b) {
    for (std::size_t k = 0; k < dim; ++k) offset[b] += grid.axis_index(b, k) * stride[k];
  }
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(grid.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t a = 0; a < n; ++a) {
    std::size_t base = 0;
    for (std::size_t k = 0; k < dim; ++k) {
      base += (grid.axis_index(static_cast<std::size_t>(a), k) + grid.axis(k).points - 1) * stride[k];
    }
    double sum = 0.0;
    for (std::size_t b = 0; b < grid.size(); ++b) sum += kernel[base - offset[b]] * source[b];
    out.potential[a] = sum * dv;
  }
  return out;
}

VectorField nonlocal_current(const DifferentialOperator& h, const GridState& psi, double t, const SampleSpec& spec) {
  if (h.dimension() < 2) throw std::invalid_argument("the nonlocal current construction needs N >= 2");
  require_hermitian(h, spec);
  const auto source = source_term(h, psi, t);
  const auto solution = poisson_solve(psi.grid, source);
  VectorField j(psi.grid);
  for (std::size_t i = 0; i < psi.grid.dimension(); ++i) {
    j.components[i] = gradient_component(psi.grid, solution.potential, i);
  }
  return j;
}

}  // namespace pilotwave
