// AVX2 + FMA variants. Compiled with -mavx2 -mfma; only reached through the
// dispatcher after a CPUID check.

#include <immintrin.h>

#include <cstring>
#include <numbers>

#include "fieldctl/simd.hpp"

namespace fieldctl::simd {
namespace {

constexpr double kInv4Pi = 0.25 / std::numbers::pi;

// pi/2 split into three parts (Cody-Waite); the leading parts have enough
// trailing zero bits that q * part is exact for |q| < 2^29.
constexpr double kPio2Hi = 1.57079625129699707031e+00;
constexpr double kPio2Mid = 7.54978941586159635336e-08;
constexpr double kPio2Lo = 5.39030285815811905290e-15;
constexpr double kTwoOverPi = 0.63661977236758134308;

// Minimax coefficients on [-pi/4, pi/4] (Cephes sin.c / cos.c).
constexpr double kSin[6] = {1.58962301576546568060e-10, -2.50507477628578072866e-8, 2.75573136213857245213e-6,
                            -1.98412698295895385996e-4, 8.33333333332211858878e-3, -1.66666666666666307295e-1};
constexpr double kCos[6] = {-1.13585365213876817300e-11, 2.08757008419747316778e-9, -2.75573141792967388112e-7,
                            2.48015872888517045348e-5, -1.38888888888730564116e-3, 4.16666666666665929218e-2};

inline __m256d poly6(__m256d z, const double (&c)[6])
{
    __m256d p = _mm256_set1_pd(c[0]);
    for (int i = 1; i < 6; ++i)
        p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(c[i]));
    return p;
}

inline void sincos4(__m256d x, __m256d& s_out, __m256d& c_out)
{
    const __m256d q = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(kTwoOverPi)),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(q, _mm256_set1_pd(kPio2Hi), x);
    r = _mm256_fnmadd_pd(q, _mm256_set1_pd(kPio2Mid), r);
    r = _mm256_fnmadd_pd(q, _mm256_set1_pd(kPio2Lo), r);

    const __m256d z = _mm256_mul_pd(r, r);
    const __m256d sp = _mm256_fmadd_pd(_mm256_mul_pd(r, z), poly6(z, kSin), r);
    const __m256d cp = _mm256_fmadd_pd(_mm256_mul_pd(z, z), poly6(z, kCos),
                                       _mm256_fnmadd_pd(_mm256_set1_pd(0.5), z, _mm256_set1_pd(1.0)));

    const __m256i quadrant = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(q));
    const __m256i one = _mm256_set1_epi64x(1);
    const __m256i two = _mm256_set1_epi64x(2);
    const __m256d swap = _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(quadrant, one), one));
    const __m256i sin_neg = _mm256_slli_epi64(_mm256_and_si256(quadrant, two), 62);
    const __m256i cos_neg = _mm256_slli_epi64(_mm256_and_si256(_mm256_add_epi64(quadrant, one), two), 62);

    const __m256d s = _mm256_blendv_pd(sp, cp, swap);
    const __m256d c = _mm256_blendv_pd(cp, sp, swap);
    s_out = _mm256_xor_pd(s, _mm256_castsi256_pd(sin_neg));
    c_out = _mm256_xor_pd(c, _mm256_castsi256_pd(cos_neg));
}

// Copies a partial tail into 4-wide scratch so the vector body handles it;
// padded lanes get a unit distance and zero weight.
struct Tail {
    alignas(32) double x[4], y[4], z[4], w[4];

    Tail(const double p[3], NodeView nodes, std::size_t start)
    {
        const std::size_t rem = nodes.n - start;
        for (std::size_t i = 0; i < 4; ++i) {
            const bool live = i < rem;
            x[i] = live ? nodes.x[start + i] : p[0] + 1.0;
            y[i] = live ? nodes.y[start + i] : p[1];
            z[i] = live ? nodes.z[start + i] : p[2];
            w[i] = live ? nodes.w[start + i] : 0.0;
        }
    }
};

template <class Body>
void for_each_block(const double p[3], NodeView nodes, double* re, double* im, Body&& body)
{
    std::size_t q = 0;
    for (; q + 4 <= nodes.n; q += 4) {
        __m256d vr, vi;
        body(_mm256_loadu_pd(nodes.x + q), _mm256_loadu_pd(nodes.y + q), _mm256_loadu_pd(nodes.z + q),
             _mm256_loadu_pd(nodes.w + q), vr, vi);
        _mm256_storeu_pd(re + q, vr);
        _mm256_storeu_pd(im + q, vi);
    }
    if (q < nodes.n) {
        const Tail t(p, nodes, q);
        __m256d vr, vi;
        body(_mm256_load_pd(t.x), _mm256_load_pd(t.y), _mm256_load_pd(t.z), _mm256_load_pd(t.w), vr, vi);
        alignas(32) double br[4], bi[4];
        _mm256_store_pd(br, vr);
        _mm256_store_pd(bi, vi);
        const std::size_t rem = nodes.n - q;
        std::memcpy(re + q, br, rem * sizeof(double));
        std::memcpy(im + q, bi, rem * sizeof(double));
    }
}

void single_layer(const double p[3], double k, NodeView nodes, double* re, double* im)
{
    const __m256d px = _mm256_set1_pd(p[0]);
    const __m256d py = _mm256_set1_pd(p[1]);
    const __m256d pz = _mm256_set1_pd(p[2]);
    const __m256d vk = _mm256_set1_pd(k);
    const __m256d inv4pi = _mm256_set1_pd(kInv4Pi);

    for_each_block(p, nodes, re, im, [&](__m256d x, __m256d y, __m256d z, __m256d w, __m256d& out_re, __m256d& out_im) {
        const __m256d dx = _mm256_sub_pd(px, x);
        const __m256d dy = _mm256_sub_pd(py, y);
        const __m256d dz = _mm256_sub_pd(pz, z);
        const __m256d r2 = _mm256_fmadd_pd(dz, dz, _mm256_fmadd_pd(dy, dy, _mm256_mul_pd(dx, dx)));
        const __m256d r = _mm256_sqrt_pd(r2);
        __m256d s, c;
        sincos4(_mm256_mul_pd(vk, r), s, c);
        const __m256d scale = _mm256_div_pd(_mm256_mul_pd(w, inv4pi), r);
        out_re = _mm256_mul_pd(scale, c);
        out_im = _mm256_mul_pd(scale, s);
    });
}

void normal_derivative(const double p[3], const double n[3], double k, NodeView nodes, double* re, double* im)
{
    const __m256d px = _mm256_set1_pd(p[0]);
    const __m256d py = _mm256_set1_pd(p[1]);
    const __m256d pz = _mm256_set1_pd(p[2]);
    const __m256d nx = _mm256_set1_pd(n[0]);
    const __m256d ny = _mm256_set1_pd(n[1]);
    const __m256d nz = _mm256_set1_pd(n[2]);
    const __m256d vk = _mm256_set1_pd(k);
    const __m256d inv4pi = _mm256_set1_pd(kInv4Pi);
    const __m256d one = _mm256_set1_pd(1.0);

    for_each_block(p, nodes, re, im, [&](__m256d x, __m256d y, __m256d z, __m256d w, __m256d& out_re, __m256d& out_im) {
        const __m256d dx = _mm256_sub_pd(px, x);
        const __m256d dy = _mm256_sub_pd(py, y);
        const __m256d dz = _mm256_sub_pd(pz, z);
        const __m256d r2 = _mm256_fmadd_pd(dz, dz, _mm256_fmadd_pd(dy, dy, _mm256_mul_pd(dx, dx)));
        const __m256d r = _mm256_sqrt_pd(r2);
        const __m256d inv_r = _mm256_div_pd(one, r);
        __m256d s, c;
        sincos4(_mm256_mul_pd(vk, r), s, c);
        const __m256d ndot = _mm256_fmadd_pd(nz, dz, _mm256_fmadd_pd(ny, dy, _mm256_mul_pd(nx, dx)));
        const __m256d scale = _mm256_mul_pd(_mm256_mul_pd(_mm256_mul_pd(w, inv4pi), ndot), _mm256_mul_pd(inv_r, inv_r));
        // (ik - 1/r)(c + i s) = (-c/r - k s) + i (k c - s/r)
        const __m256d a = _mm256_fmadd_pd(vk, s, _mm256_mul_pd(c, inv_r));
        const __m256d b = _mm256_fmsub_pd(vk, c, _mm256_mul_pd(s, inv_r));
        out_re = _mm256_mul_pd(scale, _mm256_sub_pd(_mm256_setzero_pd(), a));
        out_im = _mm256_mul_pd(scale, b);
    });
}

void sincos(const double* x, double* s, double* c, std::size_t n)
{
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vs, vc;
        sincos4(_mm256_loadu_pd(x + i), vs, vc);
        _mm256_storeu_pd(s + i, vs);
        _mm256_storeu_pd(c + i, vc);
    }
    if (i < n) {
        alignas(32) double bx[4] = {0.0, 0.0, 0.0, 0.0}, bs[4], bc[4];
        std::memcpy(bx, x + i, (n - i) * sizeof(double));
        __m256d vs, vc;
        sincos4(_mm256_load_pd(bx), vs, vc);
        _mm256_store_pd(bs, vs);
        _mm256_store_pd(bc, vc);
        std::memcpy(s + i, bs, (n - i) * sizeof(double));
        std::memcpy(c + i, bc, (n - i) * sizeof(double));
    }
}

}  // namespace

namespace detail {
const KernelTable avx2_table{Isa::avx2, &single_layer, &normal_derivative, &sincos};
}

}  // namespace fieldctl::simd
