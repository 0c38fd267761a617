#include "pilotwave/kernels.hpp"

#include <cassert>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pilotwave::kernels {

namespace {

using Index = std::ptrdiff_t;

template <bool Parallel>
void axpy_scalar(std::span<Complex> out, Complex c, std::span<const Complex> x) {
  assert(out.size() == x.size());
  const Index n = static_cast<Index>(out.size());
#pragma omp parallel for if (Parallel) schedule(static)
  for (Index k = 0; k < n; ++k) out[k] += c * x[k];
}

template <bool Parallel>
void axpy_field(std::span<Complex> out, std::span<const Complex> coeff, std::span<const Complex> x) {
  assert(out.size() == x.size() && out.size() == coeff.size());
  const Index n = static_cast<Index>(out.size());
#pragma omp parallel for if (Parallel) schedule(static)
  for (Index k = 0; k < n; ++k) out[k] += coeff[k] * x[k];
}

template <bool Parallel>
void bilinear_scalar(std::span<Complex> out, Complex c, std::span<const Complex> a,
                     std::span<const Complex> b) {
  assert(out.size() == a.size() && out.size() == b.size());
  const Index n = static_cast<Index>(out.size());
#pragma omp parallel for if (Parallel) schedule(static)
  for (Index k = 0; k < n; ++k) out[k] += c * (a[k] * std::conj(b[k]));
}

template <bool Parallel>
void bilinear_field(std::span<Complex> out, std::span<const Complex> coeff, std::span<const Complex> a,
                    std::span<const Complex> b) {
  assert(out.size() == a.size() && out.size() == b.size() && out.size() == coeff.size());
  const Index n = static_cast<Index>(out.size());
#pragma omp parallel for if (Parallel) schedule(static)
  for (Index k = 0; k < n; ++k) out[k] += coeff[k] * (a[k] * std::conj(b[k]));
}

template <bool Parallel>
void product_scalar(std::span<Complex> out, Complex c, std::span<const Complex> a, std::span<const Complex> b) {
  assert(out.size() == a.size() && out.size() == b.size());
  const Index n = static_cast<Index>(out.size());
#pragma omp parallel for if (Parallel) schedule(static)
  for (Index k = 0; k < n; ++k) out[k] += c * (a[k] * b[k]);
}

template <bool Parallel>
void scale_separable_impl(std::span<Complex> data, std::span<const std::size_t> shape,
                          const std::vector<std::vector<Complex>>& factors) {
  const std::size_t dim = shape.size();
  assert(factors.size() == dim);
  std::vector<std::size_t> strides(dim, 1);
  for (std::size_t k = dim; k-- > 1;) strides[k - 1] = strides[k] * shape[k];
  const Index n = static_cast<Index>(data.size());
#pragma omp parallel for if (Parallel) schedule(static)
  for (Index flat = 0; flat < n; ++flat) {
    Complex f = 1.0;
    for (std::size_t k = 0; k < dim; ++k) {
      f *= factors[k][(static_cast<std::size_t>(flat) / strides[k]) % shape[k]];
    }
    data[flat] *= f;
  }
}

}  // namespace

namespace serial {

void axpy(std::span<Complex> out, Complex c, std::span<const Complex> x) { axpy_scalar<false>(out, c, x); }
void axpy(std::span<Complex> out, std::span<const Complex> coeff, std::span<const Complex> x) {
  axpy_field<false>(out, coeff, x);
}
void bilinear(std::span<Complex> out, Complex c, std::span<const Complex> a, std::span<const Complex> b) {
  bilinear_scalar<false>(out, c, a, b);
}
void bilinear(std::span<Complex> out, std::span<const Complex> coeff, std::span<const Complex> a,
              std::span<const Complex> b) {
  bilinear_field<false>(out, coeff, a, b);
}
void product(std::span<Complex> out, Complex c, std::span<const Complex> a, std::span<const Complex> b) {
  product_scalar<false>(out, c, a, b);
}
void scale_separable(std::span<Complex> data, std::span<const std::size_t> shape,
                     const std::vector<std::vector<Complex>>& factors) {
  scale_separable_impl<false>(data, shape, factors);
}

}  // namespace serial

namespace omp {

void axpy(std::span<Complex> out, Complex c, std::span<const Complex> x) { axpy_scalar<true>(out, c, x); }
void axpy(std::span<Complex> out, std::span<const Complex> coeff, std::span<const Complex> x) {
  axpy_field<true>(out, coeff, x);
}
void bilinear(std::span<Complex> out, Complex c, std::span<const Complex> a, std::span<const Complex> b) {
  bilinear_scalar<true>(out, c, a, b);
}
void bilinear(std::span<Complex> out, std::span<const Complex> coeff, std::span<const Complex> a,
              std::span<const Complex> b) {
  bilinear_field<true>(out, coeff, a, b);
}
void product(std::span<Complex> out, Complex c, std::span<const Complex> a, std::span<const Complex> b) {
  product_scalar<true>(out, c, a, b);
}
void scale_separable(std::span<Complex> data, std::span<const std::size_t> shape,
                     const std::vector<std::vector<Complex>>& factors) {
  scale_separable_impl<true>(data, shape, factors);
}

}  // namespace omp

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace pilotwave::kernels
