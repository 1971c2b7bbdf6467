#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "fieldctl/bem.hpp"
#include "fieldctl/simd.hpp"

using namespace fieldctl;
using namespace fieldctl::simd;

namespace {

struct Cloud {
    std::vector<double> x, y, z, w;
    NodeView view() const { return {x.data(), y.data(), z.data(), w.data(), x.size()}; }
};

Cloud random_cloud(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    std::uniform_real_distribution<double> wt(0.0, 1e-4);
    Cloud c;
    for (std::size_t i = 0; i < n; ++i) {
        c.x.push_back(u(rng));
        c.y.push_back(u(rng));
        c.z.push_back(u(rng));
        c.w.push_back(wt(rng));
    }
    return c;
}

// Restores the dispatcher after a test case changes it.
struct IsaGuard {
    Isa saved = active_isa();
    ~IsaGuard() { set_active_isa(saved); }
};

}  // namespace

TEST_CASE("scalar table is always available")
{
    CHECK(isa_supported(Isa::scalar));
    CHECK(kernels_for(Isa::scalar).isa == Isa::scalar);
    MESSAGE("active isa: " << to_string(active_isa()));
}

TEST_CASE("scalar sincos matches the standard library")
{
    std::vector<double> x{0.0, 1e-300, -0.5, 1.0, 3.141592653589793, 1e3, -2.5e4};
    std::vector<double> s(x.size()), c(x.size());
    kernels_for(Isa::scalar).sincos(x.data(), s.data(), c.data(), x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(s[i] == std::sin(x[i]));
        CHECK(c[i] == std::cos(x[i]));
    }
}

TEST_CASE("avx2 sincos accuracy")
{
    if (!isa_supported(Isa::avx2)) {
        MESSAGE("avx2 not available, skipped");
        return;
    }
    const auto& t = kernels_for(Isa::avx2);
    std::mt19937_64 rng(3);
    // arguments seen in practice are k r <= 50 * 3 m; cover well past that
    for (double range : {1.0, 10.0, 200.0, 1e4}) {
        std::uniform_real_distribution<double> u(-range, range);
        std::vector<double> x(4099);
        for (auto& v : x)
            v = u(rng);
        x[0] = 0.0;
        x[1] = std::numbers::pi / 2;
        x[2] = -std::numbers::pi;
        std::vector<double> s(x.size()), c(x.size());
        t.sincos(x.data(), s.data(), c.data(), x.size());
        double worst = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            worst = std::max(worst, std::abs(s[i] - std::sin(x[i])));
            worst = std::max(worst, std::abs(c[i] - std::cos(x[i])));
        }
        MESSAGE("range " << range << ": max abs error " << worst);
        CHECK(worst < 4e-16 * std::max(1.0, range / 100.0));
    }
}

TEST_CASE("avx2 kernels agree with the scalar reference, all tail lengths")
{
    if (!isa_supported(Isa::avx2)) {
        MESSAGE("avx2 not available, skipped");
        return;
    }
    const auto& ref = kernels_for(Isa::scalar);
    const auto& vec = kernels_for(Isa::avx2);
    const double p[3] = {0.3, -0.2, 0.45};
    double n[3] = {0.2, 0.5, -0.4};
    const double nn = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
    for (double& v : n)
        v /= nn;
    for (std::size_t len : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 31u, 1638u}) {
        const Cloud cl = random_cloud(len, 100 + len);
        for (double k : {1.0, 10.0, 50.0}) {
            std::vector<double> r1(len), i1(len), r2(len), i2(len);
            ref.single_layer(p, k, cl.view(), r1.data(), i1.data());
            vec.single_layer(p, k, cl.view(), r2.data(), i2.data());
            for (std::size_t q = 0; q < len; ++q) {
                const double mag = std::hypot(r1[q], i1[q]);
                CHECK(std::abs(r1[q] - r2[q]) <= 1e-14 * mag);
                CHECK(std::abs(i1[q] - i2[q]) <= 1e-14 * mag);
            }
            ref.normal_derivative(p, n, k, cl.view(), r1.data(), i1.data());
            vec.normal_derivative(p, n, k, cl.view(), r2.data(), i2.data());
            for (std::size_t q = 0; q < len; ++q) {
                const double mag = std::hypot(r1[q], i1[q]) + 1e-300;
                CHECK(std::abs(r1[q] - r2[q]) <= 1e-13 * mag);
                CHECK(std::abs(i1[q] - i2[q]) <= 1e-13 * mag);
            }
        }
    }
}

TEST_CASE("assembled rows agree across instruction sets")
{
    if (!isa_supported(Isa::avx2)) {
        MESSAGE("avx2 not available, skipped");
        return;
    }
    IsaGuard guard;
    const std::vector<SourcePair> src{make_source_pair(Point3(0.0, 0.0, 0.0), 0.05),
                                      make_source_pair(Point3(0.2, 0.0, 0.0), 0.05)};
    const std::vector<ControlRegion> reg{
        make_control_region("w", {Point3(0.1, 0.3, 0.0), 0.1}, RegionRole::target, 64)};
    const WaveContext ctx(20.0);
    set_active_isa(Isa::scalar);
    const auto a = assemble_matrix(src, reg, ctx);
    set_active_isa(Isa::avx2);
    const auto b = assemble_matrix(src, reg, ctx);
    CHECK((a.entries - b.entries).norm() <= 1e-13 * a.entries.norm());

    // near-field refinement path: physical vertices sit close to the fictitious mesh
    DensityVector d = DensityVector::Ones(234);
    set_active_isa(Isa::scalar);
    const auto v1 = normal_velocity(d, src[0], ctx);
    set_active_isa(Isa::avx2);
    const auto v2 = normal_velocity(d, src[0], ctx);
    for (std::size_t i = 0; i < v1.size(); ++i)
        CHECK(std::abs(v1[i] - v2[i]) <= 1e-13 * std::abs(v1[i]));
}

TEST_CASE("unavailable isa is reported")
{
    if (isa_supported(Isa::avx2))
        return;
    CHECK_THROWS(kernels_for(Isa::avx2));
}
