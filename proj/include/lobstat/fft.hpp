#pragma once

#include <complex>
#include <vector>

namespace lobstat {

// In-place radix-2 FFT. Size must be a power of two. The inverse transform
// includes the 1/n scaling.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse = false);

}  // namespace lobstat
