#include "pilotwave/spectral.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

#include "pilotwave/kernels.hpp"

namespace pilotwave {

namespace {

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

std::vector<std::size_t> shape_of(const Grid& grid) {
  std::vector<std::size_t> shape(grid.dimension());
  for (std::size_t k = 0; k < grid.dimension(); ++k) shape[k] = grid.axis(k).points;
  return shape;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

FourierTransform::FourierTransform(const Grid& grid) : size_(grid.size()) {
  std::vector<int> dims;
  for (std::size_t k = 0; k < grid.dimension(); ++k) dims.push_back(static_cast<int>(grid.axis(k).points));
  std::vector<Complex> a(size_);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_plan_ = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), as_fftw(a.data()), as_fftw(a.data()),
                                FFTW_FORWARD, flags);
  backward_plan_ = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), as_fftw(a.data()), as_fftw(a.data()),
                                 FFTW_BACKWARD, flags);
  if (!forward_plan_ || !backward_plan_) throw std::runtime_error("FFTW plan creation failed");
}

FourierTransform::~FourierTransform() {
  std::lock_guard lock(plan_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
}

const FourierTransform& FourierTransform::for_grid(const Grid& grid) {
  std::mutex& mutex = plan_mutex();  // constructed before, destroyed after, the cache
  static std::map<std::vector<std::size_t>, std::unique_ptr<FourierTransform>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[shape_of(grid)];
  if (!slot) slot.reset(new FourierTransform(grid));
  return *slot;
}

void FourierTransform::forward(std::span<const Complex> in, std::span<Complex> out) const {
  if (in.size() != size_ || out.size() != size_) throw DimensionError("FFT size mismatch");
  if (in.data() != out.data()) std::copy(in.begin(), in.end(), out.begin());
  // In-place execution keeps the input untouched.
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), as_fftw(out.data()), as_fftw(out.data()));
}

void FourierTransform::backward(std::span<const Complex> in, std::span<Complex> out) const {
  if (in.size() != size_ || out.size() != size_) throw DimensionError("FFT size mismatch");
  if (in.data() != out.data()) std::copy(in.begin(), in.end(), out.begin());
  fftw_execute_dft(static_cast<fftw_plan>(backward_plan_), as_fftw(out.data()), as_fftw(out.data()));
  const double scale = 1.0 / static_cast<double>(size_);
  for (Complex& z : out) z *= scale;
}

std::vector<Complex> derivative_multipliers(const Grid& grid, std::size_t axis, int order) {
  const auto k = grid.wavenumbers(axis);
  const std::size_t n = k.size();
  std::vector<Complex> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (order % 2 == 1 && j == n / 2) {
      out[j] = 0.0;
      continue;
    }
    Complex m = 1.0;
    const Complex ik(0.0, k[j]);
    for (int p = 0; p < order; ++p) m *= ik;
    out[j] = m;
  }
  return out;
}

namespace {

std::vector<Complex> derivative_from_spectrum(const Grid& grid, std::span<const Complex> spectrum,
                                              const MultiIndex& n) {
  std::vector<Complex> work(spectrum.begin(), spectrum.end());
  if (n.is_zero()) {
    FourierTransform::for_grid(grid).backward(work, work);
    return work;
  }
  std::vector<std::vector<Complex>> factors(grid.dimension());
  for (std::size_t k = 0; k < grid.dimension(); ++k) factors[k] = derivative_multipliers(grid, k, n[k]);
  const auto shape = shape_of(grid);
  kernels::omp::scale_separable(work, shape, factors);
  FourierTransform::for_grid(grid).backward(work, work);
  return work;
}

void require_match(const Grid& grid, std::size_t size, const MultiIndex& n) {
  if (size != grid.size()) throw DimensionError("sample count does not match grid");
  if (n.dimension() != grid.dimension()) throw DimensionError("derivative multi-index does not match grid");
}

}  // namespace

std::vector<Complex> spectral_derivative(const Grid& grid, std::span<const Complex> values, const MultiIndex& n) {
  require_match(grid, values.size(), n);
  if (n.is_zero()) return {values.begin(), values.end()};
  std::vector<Complex> spectrum(values.size());
  FourierTransform::for_grid(grid).forward(values, spectrum);
  return derivative_from_spectrum(grid, spectrum, n);
}

std::vector<double> spectral_derivative(const Grid& grid, std::span<const double> values, const MultiIndex& n) {
  std::vector<Complex> z(values.begin(), values.end());
  auto d = spectral_derivative(grid, std::span<const Complex>(z), n);
  std::vector<double> out(d.size());
  for (std::size_t k = 0; k < d.size(); ++k) out[k] = d[k].real();
  return out;
}

DerivativeCache::DerivativeCache(const Grid& grid, std::span<const Complex> values)
    : grid_(grid), spectrum_(values.size()) {
  if (values.size() != grid.size()) throw DimensionError("sample count does not match grid");
  FourierTransform::for_grid(grid).forward(values, spectrum_);
  cache_.emplace(MultiIndex::zero(grid.dimension()), std::vector<Complex>(values.begin(), values.end()));
}

const std::vector<Complex>& DerivativeCache::get(const MultiIndex& n) {
  if (n.dimension() != grid_.dimension()) throw DimensionError("derivative multi-index does not match grid");
  auto it = cache_.find(n);
  if (it != cache_.end()) return it->second;
  return cache_.emplace(n, derivative_from_spectrum(grid_, spectrum_, n)).first->second;
}

std::vector<double> gradient_component(const Grid& grid, std::span<const double> values, std::size_t axis) {
  return spectral_derivative(grid, values, MultiIndex::unit(grid.dimension(), axis));
}

std::vector<double> divergence(const VectorField& field) {
  const Grid& grid = field.grid;
  if (field.components.size() != grid.dimension()) throw DimensionError("vector field has wrong component count");
  // One combined transform: sum_i (i k_i) F[j_i].
  const auto& fft = FourierTransform::for_grid(grid);
  std::vector<Complex> total(grid.size(), 0.0);
  std::vector<Complex> work(grid.size());
  const auto shape = shape_of(grid);
  for (std::size_t i = 0; i < grid.dimension(); ++i) {
    std::vector<Complex> comp(field.components[i].begin(), field.components[i].end());
    fft.forward(comp, work);
    std::vector<std::vector<Complex>> factors(grid.dimension());
    for (std::size_t k = 0; k < grid.dimension(); ++k) factors[k] = derivative_multipliers(grid, k, k == i ? 1 : 0);
    kernels::omp::scale_separable(work, shape, factors);
    kernels::omp::axpy(total, 1.0, work);
  }
  fft.backward(total, total);
  std::vector<double> out(grid.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = total[k].real();
  return out;
}

std::vector<double> laplacian(const Grid& grid, std::span<const double> values) {
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.dimension(); ++i) {
    MultiIndex n(grid.dimension());
    n = n + MultiIndex::unit(grid.dimension(), i) + MultiIndex::unit(grid.dimension(), i);
    auto d = spectral_derivative(grid, values, n);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += d[k];
  }
  return out;
}

}  // namespace pilotwave
