#pragma once

// Self-contained complex FFT: iterative radix-2 for power-of-two sizes,
// Bluestein's chirp-z algorithm for everything else. Deterministic and
// reentrant (no global planner state), so spectra computed inside
// parallel sweeps are reproducible bit-for-bit.

#include <complex>
#include <vector>

namespace ptchaos::fft {

/// In-place discrete Fourier transform, any n >= 1.
/// Forward: X_k = sum_j x_j exp(-2*pi*i*j*k/n). Inverse applies the 1/n
/// normalization.
void transform(std::vector<std::complex<double>>& a, bool inverse = false);

}  // namespace ptchaos::fft
