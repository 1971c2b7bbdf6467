#pragma once

// Data-parallel inner loops of the single-layer evaluation. Each kernel has a
// scalar reference implementation and an AVX2+FMA variant; the variant is
// chosen once at startup from CPUID and can be overridden (tests, benchmarks,
// FIELDCTL_ISA=scalar in the environment).

#include <cstddef>
#include <string>

namespace fieldctl::simd {

enum class Isa { scalar, avx2 };

std::string to_string(Isa isa);

/// Structure-of-arrays view over quadrature nodes. `w` is the full
/// quadrature weight (rule weight times surface Jacobian).
struct NodeView {
    const double* x = nullptr;
    const double* y = nullptr;
    const double* z = nullptr;
    const double* w = nullptr;
    std::size_t n = 0;
};

struct KernelTable {
    Isa isa;

    /// out[q] = w_q e^{ik r_q} / (4 pi r_q), r_q = |p - y_q|.
    void (*single_layer)(const double p[3], double k, NodeView nodes, double* re, double* im);

    /// out[q] = w_q n . grad_p e^{ik r_q} / (4 pi r_q).
    void (*normal_derivative)(const double p[3], const double n[3], double k, NodeView nodes,
                              double* re, double* im);

    /// Elementwise sine and cosine.
    void (*sincos)(const double* x, double* s, double* c, std::size_t n);
};

bool isa_supported(Isa isa);

/// Throws fieldctl::Error if the ISA is not available on this machine or
/// was not compiled in.
const KernelTable& kernels_for(Isa isa);

const KernelTable& kernels();
Isa active_isa();
void set_active_isa(Isa isa);

namespace detail {
extern const KernelTable scalar_table;
#if defined(FIELDCTL_HAVE_AVX2)
extern const KernelTable avx2_table;
#endif
}  // namespace detail

}  // namespace fieldctl::simd
