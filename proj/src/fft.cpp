#include "bktflow/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace bkt::fft {

namespace {

constexpr double kTwoPi = 6.28318530717958647692528676655900577;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_pow2(cd* data, std::size_t n, int sign) {
    // bit reversal
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * kTwoPi / double(len);
        const cd wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cd w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                if ((k & 31u) == 0)  // resync the twiddle to curb drift
                    w = cd(std::cos(ang * double(k)), std::sin(ang * double(k)));
                const cd u = data[i + k];
                const cd v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// Bluestein: arbitrary-N DFT via a power-of-2 convolution.
void fft_bluestein(cd* data, std::size_t n, int sign) {
    std::size_t m = 1;
    while (m < 2 * n + 1) m <<= 1;
    std::vector<cd> a(m, cd(0, 0)), b(m, cd(0, 0));
    std::vector<cd> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        // angle = pi k^2 / n, with k^2 reduced mod 2n to keep precision
        const std::size_t k2 = (k * k) % (2 * n);
        const double ang = sign * kTwoPi * 0.5 * double(k2) / double(n);
        chirp[k] = cd(std::cos(ang), std::sin(ang));
    }
    for (std::size_t k = 0; k < n; ++k) a[k] = data[k] * chirp[k];
    b[0] = cd(1, 0);
    for (std::size_t k = 1; k < n; ++k)
        b[k] = b[m - k] = std::conj(chirp[k]);
    fft_pow2(a.data(), m, -1);
    fft_pow2(b.data(), m, -1);
    for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
    fft_pow2(a.data(), m, +1);
    const double scale = 1.0 / double(m);
    for (std::size_t k = 0; k < n; ++k)
        data[k] = a[k] * chirp[k] * scale;
}

}  // namespace

void transform(std::vector<cd>& data, int sign) {
    const std::size_t n = data.size();
    if (n <= 1) return;
    if (is_pow2(n))
        fft_pow2(data.data(), n, sign);
    else
        fft_bluestein(data.data(), n, sign);
}

void transform_2d(std::vector<cd>& data, std::size_t n, int sign) {
    if (data.size() != n * n)
        throw std::invalid_argument("transform_2d: size mismatch");
    std::vector<cd> scratch(n);
    // rows
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) scratch[c] = data[r * n + c];
        transform(scratch, sign);
        for (std::size_t c = 0; c < n; ++c) data[r * n + c] = scratch[c];
    }
    // columns
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t r = 0; r < n; ++r) scratch[r] = data[r * n + c];
        transform(scratch, sign);
        for (std::size_t r = 0; r < n; ++r) data[r * n + c] = scratch[r];
    }
}

}  // namespace bkt::fft
