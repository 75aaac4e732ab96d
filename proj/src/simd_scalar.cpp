// Scalar reference kernels.  The 4-lane accumulation structure and the
// per-element operation order are the contract the AVX2 variants must
// reproduce exactly.
#include "bktflow/simd.hpp"

#include <algorithm>
#include <cmath>

namespace bkt::simd::detail {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::uint32_t& c0, std::uint32_t& c1,
                         std::uint32_t& c2, std::uint32_t& c3,
                         std::uint32_t k0, std::uint32_t k1) {
    const std::uint64_t p0 = std::uint64_t(kPhiloxM0) * c0;
    const std::uint64_t p1 = std::uint64_t(kPhiloxM1) * c2;
    const std::uint32_t hi0 = std::uint32_t(p0 >> 32);
    const std::uint32_t lo0 = std::uint32_t(p0);
    const std::uint32_t hi1 = std::uint32_t(p1 >> 32);
    const std::uint32_t lo1 = std::uint32_t(p1);
    c0 = hi1 ^ c1 ^ k0;
    c1 = lo1;
    c2 = hi0 ^ c3 ^ k1;
    c3 = lo0;
}

}  // namespace

void philox_fill_scalar(std::uint64_t seed, std::uint64_t stream,
                        std::uint64_t ctr0, std::uint32_t* out,
                        std::size_t nblocks) {
    for (std::size_t i = 0; i < nblocks; ++i) {
        const std::uint64_t ctr = ctr0 + i;
        std::uint32_t c0 = std::uint32_t(ctr);
        std::uint32_t c1 = std::uint32_t(ctr >> 32);
        std::uint32_t c2 = std::uint32_t(stream);
        std::uint32_t c3 = std::uint32_t(stream >> 32);
        std::uint32_t k0 = std::uint32_t(seed);
        std::uint32_t k1 = std::uint32_t(seed >> 32);
        for (int r = 0; r < 10; ++r) {
            philox_round(c0, c1, c2, c3, k0, k1);
            k0 += kPhiloxW0;
            k1 += kPhiloxW1;
        }
        out[4 * i + 0] = c0;
        out[4 * i + 1] = c1;
        out[4 * i + 2] = c2;
        out[4 * i + 3] = c3;
    }
}

double combine_lanes(const double s[4], const double c[4]) {
    const double s01 = s[0] + s[1];
    const double s23 = s[2] + s[3];
    const double c01 = c[0] + c[1];
    const double c23 = c[2] + c[3];
    return (s01 + s23) + (c01 + c23);
}

double sum_scalar(const double* x, std::size_t n) {
    double s[4] = {0, 0, 0, 0};
    double c[4] = {0, 0, 0, 0};
    const std::size_t n4 = n - (n % 4);
    for (std::size_t i = 0; i < n4; i += 4) {
        for (int l = 0; l < 4; ++l) {
            const double y = x[i + l] - c[l];
            const double t = s[l] + y;
            c[l] = (t - s[l]) - y;
            s[l] = t;
        }
    }
    for (std::size_t i = n4; i < n; ++i) {
        const int l = int(i - n4);
        const double y = x[i] - c[l];
        const double t = s[l] + y;
        c[l] = (t - s[l]) - y;
        s[l] = t;
    }
    return combine_lanes(s, c);
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s[4] = {0, 0, 0, 0};
    double c[4] = {0, 0, 0, 0};
    const std::size_t n4 = n - (n % 4);
    for (std::size_t i = 0; i < n4; i += 4) {
        for (int l = 0; l < 4; ++l) {
            const double y = a[i + l] * b[i + l] - c[l];
            const double t = s[l] + y;
            c[l] = (t - s[l]) - y;
            s[l] = t;
        }
    }
    for (std::size_t i = n4; i < n; ++i) {
        const int l = int(i - n4);
        const double y = a[i] * b[i] - c[l];
        const double t = s[l] + y;
        c[l] = (t - s[l]) - y;
        s[l] = t;
    }
    return combine_lanes(s, c);
}

void hermite_eval_scalar(const HermiteTable& tab, const double* x, double* y,
                         std::size_t n) {
    const double umax = std::nextafter(double(tab.size() - 1), 0.0);
    for (std::size_t q = 0; q < n; ++q) {
        double u = (x[q] - tab.x0) * tab.inv_dx;
        u = std::min(std::max(u, 0.0), umax);
        const double fi = std::trunc(u);
        const int i = int(fi);
        const double w = u - fi;
        const double t1 = 1.0 - w;
        const double t1sq = t1 * t1;
        const double wsq = w * w;
        const double h00 = (1.0 + 2.0 * w) * t1sq;
        const double h10 = w * t1sq;
        const double h01 = wsq * (3.0 - 2.0 * w);
        const double h11 = wsq * (w - 1.0);
        const double a = h00 * tab.value[i] + h10 * (tab.dx * tab.deriv[i]);
        const double b =
            h01 * tab.value[i + 1] + h11 * (tab.dx * tab.deriv[i + 1]);
        y[q] = a + b;
    }
}

}  // namespace bkt::simd::detail
