// fft.hpp -- complex FFT (iterative radix-2, Bluestein for general N)
// and a 2D wrapper, enough for torus spectral sums up to side 4096.
#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace bkt::fft {

using cd = std::complex<double>;

// In-place transform of length data.size(); sign = -1 forward
// (e^{-i 2pi kn/N}), +1 inverse WITHOUT the 1/N normalization.
void transform(std::vector<cd>& data, int sign);

// 2D transform of row-major n x n data.
void transform_2d(std::vector<cd>& data, std::size_t n, int sign);

}  // namespace bkt::fft
