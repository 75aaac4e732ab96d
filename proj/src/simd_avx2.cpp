// AVX2 kernel variants.  Operation order mirrors the scalar references
// (no FMA contraction, per-lane Kahan compensation), so results are
// bit-identical to the scalar path.  This translation unit is the only
// one compiled with -mavx2; it is reached only behind the CPUID check.
#include "bktflow/simd.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace bkt::simd::detail {

double combine_lanes(const double s[4], const double c[4]);

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

// per-lane {mulhi, mullo} of a 32-bit constant against 8 lanes
inline void mulhilo8(__m256i c, std::uint32_t m, __m256i& hi, __m256i& lo) {
    const __m256i vm = _mm256_set1_epi32(int(m));
    const __m256i even = _mm256_mul_epu32(c, vm);
    const __m256i odd = _mm256_mul_epu32(_mm256_srli_epi64(c, 32), vm);
    lo = _mm256_mullo_epi32(c, vm);
    const __m256i hi_even = _mm256_srli_epi64(even, 32);
    const __m256i hi_odd =
        _mm256_and_si256(odd, _mm256_set1_epi64x(0xFFFFFFFF00000000ll));
    hi = _mm256_blend_epi32(hi_even, hi_odd, 0xAA);
}

}  // namespace

void philox_fill_avx2(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t ctr0, std::uint32_t* out,
                      std::size_t nblocks) {
    const std::size_t n8 = nblocks - (nblocks % 8);
    const __m256i vc2 = _mm256_set1_epi32(int(std::uint32_t(stream)));
    const __m256i vc3 = _mm256_set1_epi32(int(std::uint32_t(stream >> 32)));
    alignas(32) std::uint32_t buf[8];
    for (std::size_t i = 0; i < n8; i += 8) {
        alignas(32) std::uint32_t lo32[8], hi32[8];
        for (int l = 0; l < 8; ++l) {
            const std::uint64_t ctr = ctr0 + i + l;
            lo32[l] = std::uint32_t(ctr);
            hi32[l] = std::uint32_t(ctr >> 32);
        }
        __m256i c0 = _mm256_load_si256(reinterpret_cast<__m256i*>(lo32));
        __m256i c1 = _mm256_load_si256(reinterpret_cast<__m256i*>(hi32));
        __m256i c2 = vc2;
        __m256i c3 = vc3;
        std::uint32_t k0 = std::uint32_t(seed);
        std::uint32_t k1 = std::uint32_t(seed >> 32);
        for (int r = 0; r < 10; ++r) {
            __m256i hi0, lo0, hi1, lo1;
            mulhilo8(c0, kPhiloxM0, hi0, lo0);
            mulhilo8(c2, kPhiloxM1, hi1, lo1);
            const __m256i vk0 = _mm256_set1_epi32(int(k0));
            const __m256i vk1 = _mm256_set1_epi32(int(k1));
            c0 = _mm256_xor_si256(_mm256_xor_si256(hi1, c1), vk0);
            c1 = lo1;
            c2 = _mm256_xor_si256(_mm256_xor_si256(hi0, c3), vk1);
            c3 = lo0;
            k0 += kPhiloxW0;
            k1 += kPhiloxW1;
        }
        const __m256i* parts[4] = {&c0, &c1, &c2, &c3};
        for (int p = 0; p < 4; ++p) {
            _mm256_store_si256(reinterpret_cast<__m256i*>(buf), *parts[p]);
            for (int l = 0; l < 8; ++l) out[4 * (i + l) + p] = buf[l];
        }
    }
    if (nblocks > n8)
        philox_fill_scalar(seed, stream, ctr0 + n8, out + 4 * n8,
                           nblocks - n8);
}

double sum_avx2(const double* x, std::size_t n) {
    __m256d vs = _mm256_setzero_pd();
    __m256d vc = _mm256_setzero_pd();
    const std::size_t n4 = n - (n % 4);
    for (std::size_t i = 0; i < n4; i += 4) {
        const __m256d xv = _mm256_loadu_pd(x + i);
        const __m256d y = _mm256_sub_pd(xv, vc);
        const __m256d t = _mm256_add_pd(vs, y);
        vc = _mm256_sub_pd(_mm256_sub_pd(t, vs), y);
        vs = t;
    }
    alignas(32) double s[4], c[4];
    _mm256_store_pd(s, vs);
    _mm256_store_pd(c, vc);
    for (std::size_t i = n4; i < n; ++i) {
        const int l = int(i - n4);
        const double y = x[i] - c[l];
        const double t = s[l] + y;
        c[l] = (t - s[l]) - y;
        s[l] = t;
    }
    return combine_lanes(s, c);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d vs = _mm256_setzero_pd();
    __m256d vc = _mm256_setzero_pd();
    const std::size_t n4 = n - (n % 4);
    for (std::size_t i = 0; i < n4; i += 4) {
        const __m256d av = _mm256_loadu_pd(a + i);
        const __m256d bv = _mm256_loadu_pd(b + i);
        const __m256d y = _mm256_sub_pd(_mm256_mul_pd(av, bv), vc);
        const __m256d t = _mm256_add_pd(vs, y);
        vc = _mm256_sub_pd(_mm256_sub_pd(t, vs), y);
        vs = t;
    }
    alignas(32) double s[4], c[4];
    _mm256_store_pd(s, vs);
    _mm256_store_pd(c, vc);
    for (std::size_t i = n4; i < n; ++i) {
        const int l = int(i - n4);
        const double y = a[i] * b[i] - c[l];
        const double t = s[l] + y;
        c[l] = (t - s[l]) - y;
        s[l] = t;
    }
    return combine_lanes(s, c);
}

void hermite_eval_avx2(const HermiteTable& tab, const double* x, double* y,
                       std::size_t n) {
    const double umax_s = std::nextafter(double(tab.size() - 1), 0.0);
    const __m256d vx0 = _mm256_set1_pd(tab.x0);
    const __m256d vinv = _mm256_set1_pd(tab.inv_dx);
    const __m256d vzero = _mm256_setzero_pd();
    const __m256d vumax = _mm256_set1_pd(umax_s);
    const __m256d vdx = _mm256_set1_pd(tab.dx);
    const __m256d v1 = _mm256_set1_pd(1.0);
    const __m256d v2 = _mm256_set1_pd(2.0);
    const __m256d v3 = _mm256_set1_pd(3.0);
    const double* f = tab.value.data();
    const double* d = tab.deriv.data();
    const std::size_t n4 = n - (n % 4);
    for (std::size_t q = 0; q < n4; q += 4) {
        __m256d u = _mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(x + q), vx0),
                                  vinv);
        u = _mm256_min_pd(_mm256_max_pd(u, vzero), vumax);
        const __m256d fi = _mm256_round_pd(
            u, _MM_FROUND_TO_ZERO | _MM_FROUND_NO_EXC);
        const __m128i idx = _mm256_cvttpd_epi32(u);
        const __m128i idx1 = _mm_add_epi32(idx, _mm_set1_epi32(1));
        const __m256d w = _mm256_sub_pd(u, fi);
        const __m256d t1 = _mm256_sub_pd(v1, w);
        const __m256d t1sq = _mm256_mul_pd(t1, t1);
        const __m256d wsq = _mm256_mul_pd(w, w);
        const __m256d h00 =
            _mm256_mul_pd(_mm256_add_pd(v1, _mm256_mul_pd(v2, w)), t1sq);
        const __m256d h10 = _mm256_mul_pd(w, t1sq);
        const __m256d h01 =
            _mm256_mul_pd(wsq, _mm256_sub_pd(v3, _mm256_mul_pd(v2, w)));
        const __m256d h11 = _mm256_mul_pd(wsq, _mm256_sub_pd(w, v1));
        const __m256d f0 = _mm256_i32gather_pd(f, idx, 8);
        const __m256d f1 = _mm256_i32gather_pd(f, idx1, 8);
        const __m256d d0 = _mm256_i32gather_pd(d, idx, 8);
        const __m256d d1 = _mm256_i32gather_pd(d, idx1, 8);
        const __m256d a = _mm256_add_pd(
            _mm256_mul_pd(h00, f0),
            _mm256_mul_pd(h10, _mm256_mul_pd(vdx, d0)));
        const __m256d b = _mm256_add_pd(
            _mm256_mul_pd(h01, f1),
            _mm256_mul_pd(h11, _mm256_mul_pd(vdx, d1)));
        _mm256_storeu_pd(y + q, _mm256_add_pd(a, b));
    }
    if (n > n4) hermite_eval_scalar(tab, x + n4, y + n4, n - n4);
}

}  // namespace bkt::simd::detail

#else

namespace bkt::simd::detail {

// Fallbacks when the compiler cannot target AVX2; never selected at runtime.
void philox_fill_avx2(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t ctr0, std::uint32_t* out,
                      std::size_t nblocks) {
    philox_fill_scalar(seed, stream, ctr0, out, nblocks);
}
double sum_avx2(const double* x, std::size_t n) { return sum_scalar(x, n); }
double dot_avx2(const double* a, const double* b, std::size_t n) {
    return dot_scalar(a, b, n);
}
void hermite_eval_avx2(const HermiteTable& tab, const double* x, double* y,
                       std::size_t n) {
    hermite_eval_scalar(tab, x, y, n);
}

}  // namespace bkt::simd::detail

#endif
