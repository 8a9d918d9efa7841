#ifndef KERNELSMITH_FFT_HPP
#define KERNELSMITH_FFT_HPP

#include "kernelsmith/types.hpp"

namespace kernelsmith {

// In-place radix-2 FFT, forward = sum_k f_k exp(-2 pi i jk/M).  Length must
// be a power of two (boundary grids are constructed that way).
void fft_radix2(CVector& data, bool inverse);

CVector fft_forward(const CVector& samples);
CVector fft_inverse(const CVector& coeffs);

// d/dt of a 1-periodic sample vector (equispaced t_k = k/M), computed by
// multiplication with 2 pi i k in frequency space.  The Nyquist mode is
// dropped; analytic data puts nothing there anyway.
CVector spectral_derivative(const CVector& samples, int order = 1);

// Trigonometric interpolation of equispaced periodic samples at parameter t.
Complex trig_interpolate(const CVector& coeffs, double t);

}  // namespace kernelsmith

#endif
