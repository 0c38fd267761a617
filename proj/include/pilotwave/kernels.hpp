#ifndef PILOTWAVE_KERNELS_HPP
#define PILOTWAVE_KERNELS_HPP

// Pointwise grid kernels.  Every kernel exists twice with identical
// signatures: kernels::omp is what the library calls, kernels::serial is the
// plain reference kept for tests and the benchmark.  Each output point is
// computed by the same arithmetic in both, so results agree bit for bit.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace pilotwave::kernels {

using Complex = std::complex<double>;

namespace serial {

/// out += c * x
void axpy(std::span<Complex> out, Complex c, std::span<const Complex> x);
/// out += coeff .* x
void axpy(std::span<Complex> out, std::span<const Complex> coeff, std::span<const Complex> x);
/// out += c * a .* conj(b)
void bilinear(std::span<Complex> out, Complex c, std::span<const Complex> a, std::span<const Complex> b);
/// out += coeff .* a .* conj(b)
void bilinear(std::span<Complex> out, std::span<const Complex> coeff, std::span<const Complex> a,
              std::span<const Complex> b);
/// out += c * a .* b
void product(std::span<Complex> out, Complex c, std::span<const Complex> a, std::span<const Complex> b);
/// data *= separable multiplier prod_k factors[k][index_k]; shape row-major.
void scale_separable(std::span<Complex> data, std::span<const std::size_t> shape,
                     const std::vector<std::vector<Complex>>& factors);

}  // namespace serial

namespace omp {

void axpy(std::span<Complex> out, Complex c, std::span<const Complex> x);
void axpy(std::span<Complex> out, std::span<const Complex> coeff, std::span<const Complex> x);
void bilinear(std::span<Complex> out, Complex c, std::span<const Complex> a, std::span<const Complex> b);
void bilinear(std::span<Complex> out, std::span<const Complex> coeff, std::span<const Complex> a,
              std::span<const Complex> b);
void product(std::span<Complex> out, Complex c, std::span<const Complex> a, std::span<const Complex> b);
void scale_separable(std::span<Complex> data, std::span<const std::size_t> shape,
                     const std::vector<std::vector<Complex>>& factors);

}  // namespace omp

/// Number of OpenMP threads available (1 when built without OpenMP).
int max_threads();

}  // namespace pilotwave::kernels

#endif  // PILOTWAVE_KERNELS_HPP
