// simd.hpp -- runtime-dispatched data-parallel kernels.
//
// Every kernel has a scalar reference implementation and an AVX2 variant
// written with the same operation order (mul/add, per-lane compensated
// accumulation), so the two paths produce bit-identical results.  The
// active variant is selected once at startup from CPUID; tests can force
// a lane to cross-check.
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace bkt::simd {

enum class Lane { scalar, avx2 };

Lane active_lane();
void force_lane(Lane lane);   // for equivalence tests
bool cpu_has_avx2();
std::string lane_name(Lane lane);

// Philox 4x32-10 counter-based generator.  Block i of `out` (4 words)
// is the output for counter (ctr0 + i, stream), keyed by `seed`.
void philox_fill(std::uint64_t seed, std::uint64_t stream,
                 std::uint64_t ctr0, std::uint32_t* out, std::size_t nblocks);

// Deterministic reductions: 4 interleaved Kahan lanes combined in fixed
// order.  Result is independent of the active lane.
double sum(const double* x, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);

// Cubic Hermite interpolation on a uniform grid.  `value[i]` and
// `deriv[i]` hold f and f' at x0 + i*dx.  Queries are clamped to the
// table range; tables are built so the clamped region is below the
// truncation tolerance.
struct HermiteTable {
    double x0 = 0.0;
    double dx = 1.0;
    double inv_dx = 1.0;
    std::vector<double> value;
    std::vector<double> deriv;

    std::size_t size() const { return value.size(); }
    double x_max() const { return x0 + dx * double(size() - 1); }
    double eval(double x) const;   // single-point convenience (scalar path)
};

void hermite_eval(const HermiteTable& tab, const double* x, double* y,
                  std::size_t n);

namespace detail {
// raw kernel entry points, used by dispatch and by the equivalence tests
void philox_fill_scalar(std::uint64_t, std::uint64_t, std::uint64_t,
                        std::uint32_t*, std::size_t);
double sum_scalar(const double*, std::size_t);
double dot_scalar(const double*, const double*, std::size_t);
void hermite_eval_scalar(const HermiteTable&, const double*, double*,
                         std::size_t);
void philox_fill_avx2(std::uint64_t, std::uint64_t, std::uint64_t,
                      std::uint32_t*, std::size_t);
double sum_avx2(const double*, std::size_t);
double dot_avx2(const double*, const double*, std::size_t);
void hermite_eval_avx2(const HermiteTable&, const double*, double*,
                       std::size_t);
}  // namespace detail

}  // namespace bkt::simd
