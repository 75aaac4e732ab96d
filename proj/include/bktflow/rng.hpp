// rng.hpp -- counter-based random streams (Philox 4x32-10).
//
// Draws are addressed, not sequential: sample index -> values, so a run
// partitioned over any number of threads reproduces the single-thread
// stream exactly.
#pragma once

#include <cstdint>
#include <vector>

#include "bktflow/simd.hpp"

namespace bkt::rng {

// Two uniforms in (0,1) from one counter block.
struct U2 {
    double u0;
    double u1;
};

inline double u01(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (std::uint64_t(hi) << 32) | lo;
    return (double(bits >> 11) + 0.5) * 0x1.0p-53;
}

inline U2 uniforms(std::uint64_t seed, std::uint64_t stream,
                   std::uint64_t index) {
    std::uint32_t w[4];
    simd::philox_fill(seed, stream, index, w, 1);
    return {u01(w[0], w[1]), u01(w[2], w[3])};
}

// Standard normal pair (Box-Muller) for a given counter.
struct N2 {
    double n0;
    double n1;
};

N2 normals(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

// Fills `out` with n standard normals from consecutive counters starting
// at `index0` (counter i produces out[2i], out[2i+1]).
void fill_normals(std::uint64_t seed, std::uint64_t stream,
                  std::uint64_t index0, double* out, std::size_t n);

}  // namespace bkt::rng
