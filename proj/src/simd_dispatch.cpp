#include "bktflow/simd.hpp"

namespace bkt::simd {

namespace {

Lane g_lane = cpu_has_avx2() ? Lane::avx2 : Lane::scalar;

}  // namespace

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

Lane active_lane() { return g_lane; }

void force_lane(Lane lane) {
    g_lane = (lane == Lane::avx2 && cpu_has_avx2()) ? Lane::avx2
                                                    : Lane::scalar;
}

std::string lane_name(Lane lane) {
    return lane == Lane::avx2 ? "avx2" : "scalar";
}

void philox_fill(std::uint64_t seed, std::uint64_t stream, std::uint64_t ctr0,
                 std::uint32_t* out, std::size_t nblocks) {
    if (g_lane == Lane::avx2)
        detail::philox_fill_avx2(seed, stream, ctr0, out, nblocks);
    else
        detail::philox_fill_scalar(seed, stream, ctr0, out, nblocks);
}

double sum(const double* x, std::size_t n) {
    return g_lane == Lane::avx2 ? detail::sum_avx2(x, n)
                                : detail::sum_scalar(x, n);
}

double dot(const double* a, const double* b, std::size_t n) {
    return g_lane == Lane::avx2 ? detail::dot_avx2(a, b, n)
                                : detail::dot_scalar(a, b, n);
}

void hermite_eval(const HermiteTable& tab, const double* x, double* y,
                  std::size_t n) {
    if (g_lane == Lane::avx2)
        detail::hermite_eval_avx2(tab, x, y, n);
    else
        detail::hermite_eval_scalar(tab, x, y, n);
}

double HermiteTable::eval(double x) const {
    double y;
    detail::hermite_eval_scalar(*this, &x, &y, 1);
    return y;
}

}  // namespace bkt::simd
