#include "bktflow/rng.hpp"

#include <cmath>

namespace bkt::rng {

N2 normals(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    const U2 u = uniforms(seed, stream, index);
    const double r = std::sqrt(-2.0 * std::log(u.u0));
    const double th = 2.0 * 3.14159265358979323846 * u.u1;
    return {r * std::cos(th), r * std::sin(th)};
}

void fill_normals(std::uint64_t seed, std::uint64_t stream,
                  std::uint64_t index0, double* out, std::size_t n) {
    const std::size_t nblocks = (n + 1) / 2;
    std::vector<std::uint32_t> words(4 * nblocks);
    simd::philox_fill(seed, stream, index0, words.data(), nblocks);
    for (std::size_t i = 0; i < nblocks; ++i) {
        const double u0 = u01(words[4 * i + 0], words[4 * i + 1]);
        const double u1 = u01(words[4 * i + 2], words[4 * i + 3]);
        const double r = std::sqrt(-2.0 * std::log(u0));
        const double th = 2.0 * 3.14159265358979323846 * u1;
        out[2 * i] = r * std::cos(th);
        if (2 * i + 1 < n) out[2 * i + 1] = r * std::sin(th);
    }
}

}  // namespace bkt::rng
