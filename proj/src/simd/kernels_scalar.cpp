#include <cmath>
#include <numbers>

#include "fieldctl/simd.hpp"

namespace fieldctl::simd {
namespace {

constexpr double kInv4Pi = 0.25 / std::numbers::pi;

void single_layer(const double p[3], double k, NodeView nodes, double* re, double* im)
{
    for (std::size_t q = 0; q < nodes.n; ++q) {
        const double dx = p[0] - nodes.x[q];
        const double dy = p[1] - nodes.y[q];
        const double dz = p[2] - nodes.z[q];
        const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
        const double scale = nodes.w[q] * kInv4Pi / r;
        re[q] = scale * std::cos(k * r);
        im[q] = scale * std::sin(k * r);
    }
}

void normal_derivative(const double p[3], const double n[3], double k, NodeView nodes, double* re, double* im)
{
    for (std::size_t q = 0; q < nodes.n; ++q) {
        const double dx = p[0] - nodes.x[q];
        const double dy = p[1] - nodes.y[q];
        const double dz = p[2] - nodes.z[q];
        const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
        const double inv_r = 1.0 / r;
        const double c = std::cos(k * r);
        const double s = std::sin(k * r);
        // (ik - 1/r) e^{ikr} (n.d) / (4 pi r^2)
        const double scale = nodes.w[q] * kInv4Pi * (n[0] * dx + n[1] * dy + n[2] * dz) * inv_r * inv_r;
        re[q] = scale * (-c * inv_r - k * s);
        im[q] = scale * (k * c - s * inv_r);
    }
}

void sincos(const double* x, double* s, double* c, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = std::sin(x[i]);
        c[i] = std::cos(x[i]);
    }
}

}  // namespace

namespace detail {
const KernelTable scalar_table{Isa::scalar, &single_layer, &normal_derivative, &sincos};
}

}  // namespace fieldctl::simd
