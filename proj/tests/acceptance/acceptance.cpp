// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.
// Exit status is 1 when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <optional>
#include <string>

#include <Eigen/SVD>

#include "fieldctl/export.hpp"
#include "fieldctl/run.hpp"

using namespace fieldctl;
namespace fs = std::filesystem;

namespace {

// criterion 1
constexpr double kQuadTol = 1e-13;
// criterion 2
constexpr double kSphereTolCoarse = 1e-3;
constexpr double kSphereTolRefined = 1e-4;
// criterion 3
constexpr double kSvdTol = 1e-10;
constexpr int kRandomSystems = 200;
// criterion 4
constexpr double kHelmholtzTol = 1e-3;
constexpr double kHelmholtzStep = 1e-3;
constexpr int kHelmholtzProbes = 50;
// criterion 5
constexpr double kCarTargetTol = 0.10;
constexpr double kCarNullSupTol = 5e-2;
constexpr double kCarNullMedianTol = 5e-3;
// criterion 6
constexpr double kPhoneTargetTol = 0.05;
constexpr double kPhoneFarSupTol = 1e-2;
constexpr double kPhoneOrdersBelow = 1e-2;  // far sup <= 1e-2 x near-field magnitude
// criterion 7
constexpr double kCarSweepTol = 0.03;
constexpr double kCarSweepNullTol = 1e-2;
constexpr double kPhoneSweepTol = 0.08;
constexpr double kPhoneSweepNullTol = 1e-3;
const std::vector<double> kReducedSweep{1, 5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
// criterion 9
constexpr double kStabilityEpsilon = 1e-3;
constexpr double kStabilityTol = 0.01;  // one percentage point

int failures = 0;

void verdict(int id, bool ok, const std::string& what, double seconds)
{
    std::printf("%s  [%d] %s  (%.1f s)\n", ok ? "PASS" : "FAIL", id, what.c_str(), seconds);
    std::fflush(stdout);
    failures += ok ? 0 : 1;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

class Timer {
public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

double factorial(int n)
{
    double f = 1.0;
    for (int i = 2; i <= n; ++i)
        f *= i;
    return f;
}

void criterion_quadrature()
{
    Timer t;
    const Point3 tris[2][3] = {{Point3(0, 0, 0), Point3(1, 0, 0), Point3(0, 1, 0)},
                               {Point3(0.3, -0.2, 0.1), Point3(1.7, 0.4, -0.5), Point3(-0.4, 1.1, 0.9)}};
    double worst = 0.0;
    for (const auto& tri : tris) {
        const double area = triangle_area(tri[0], tri[1], tri[2]);
        for (int a = 0; a <= 5; ++a)
            for (int b = 0; a + b <= 5; ++b)
                for (int c = 0; a + b + c <= 5; ++c) {
                    const double got = quad7(
                        [&](const Point3&, const auto& l) {
                            return std::pow(l[0], a) * std::pow(l[1], b) * std::pow(l[2], c);
                        },
                        tri[0], tri[1], tri[2]);
                    const double exact = 2.0 * area * factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 2);
                    worst = std::max(worst, std::abs(got - exact) / exact);
                }
    }
    verdict(1, worst < kQuadTol, fmt("quadrature exactness, degree <= 5: max rel error %.2e (tol %.0e)", worst, kQuadTol),
            t.seconds());
}

void criterion_sphere_oracle()
{
    Timer t;
    const double a = 0.04, r = 0.5, k = 10.0;
    const cplx exact = a * std::sin(k * a) * std::exp(cplx(0.0, k * r)) / (k * r);
    auto worst = [&](int rings, int sectors) {
        SourcePair sp;
        sp.fictitious = {Point3::Zero(), a};
        sp.physical = {Point3::Zero(), a / 0.8};
        sp.mesh = triangulate_sphere(sp.fictitious, rings, sectors);
        sp.physical_mesh = triangulate_sphere(sp.physical, rings, sectors);
        const std::vector<SourcePair> src{sp};
        const DensityVector ones = DensityVector::Ones(static_cast<Eigen::Index>(sp.mesh.vertex_count()));
        std::vector<Point3> pts;
        for (const Point3& d : {Point3(0, 0, 1), Point3(1, 0, 0), Point3(0, -1, 0), Point3(0.3, -0.5, 0.8),
                                Point3(-0.7, 0.2, -0.4)})
            pts.push_back(r * d.normalized());
        double w = 0.0;
        for (const auto& u : radiate(ones, src, WaveContext(k), pts))
            w = std::max(w, std::abs(u - exact) / std::abs(exact));
        return w;
    };
    const double coarse = worst(8, 29), refined = worst(16, 58);
    verdict(2, coarse <= kSphereTolCoarse && refined <= kSphereTolRefined,
            fmt("constant-density sphere oracle: %.2e at 234 vertices (tol %.0e), %.2e refined (tol %.0e)", coarse,
                kSphereTolCoarse, refined, kSphereTolRefined),
            t.seconds());
}

void criterion_svd()
{
    Timer t;
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> g;
    auto random = [&](int m, int n) {
        Eigen::MatrixXcd A(m, n);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < m; ++i)
                A(i, j) = cplx(g(rng), g(rng));
        return A;
    };
    double worst = 0.0;
    int non_monotone = 0;
    for (int trial = 0; trial < kRandomSystems; ++trial) {
        const int m = std::uniform_int_distribution<int>(1, 30)(rng);
        const int n = std::uniform_int_distribution<int>(1, 20)(rng);
        const Eigen::MatrixXcd A = random(m, n);
        const Eigen::VectorXcd b = random(m, 1).col(0);
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const TikhonovSystem sys(A, b);
        double prev = 0.0;
        for (double s = -8.0; s <= 2.0; s += 0.5) {
            const double alpha = std::pow(10.0, s);
            Eigen::VectorXcd ref = Eigen::VectorXcd::Zero(n);
            for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
                const double sv = svd.singularValues()[i];
                ref += (sv / (sv * sv + alpha)) * svd.matrixU().col(i).dot(b) * svd.matrixV().col(i);
            }
            const DensityVector c = sys.solve(alpha);
            worst = std::max(worst, (c - ref).norm() / std::max(ref.norm(), 1e-300));
            const double res = sys.residual(c);
            if (res < prev * (1.0 - 1e-12))
                ++non_monotone;
            prev = res;
        }
    }
    verdict(3, worst <= kSvdTol && non_monotone == 0,
            fmt("Tikhonov vs SVD filter factors on %.0f random systems: max rel diff %.2e (tol %.0e), %.0f "
                "non-monotone residual steps",
                kRandomSystems, worst, kSvdTol, non_monotone),
            t.seconds());
}

void criterion_helmholtz(const RunArtifacts& car)
{
    Timer t;
    std::mt19937_64 rng(car.config.seed);
    std::uniform_real_distribution<double> ux(-0.9, 0.9), uy(-1.0, 1.0), uz(-0.4, 0.4);
    std::vector<Point3> probes;
    while (static_cast<int>(probes.size()) < kHelmholtzProbes) {
        const Point3 p(ux(rng), uy(rng), uz(rng));
        bool clear = true;
        for (const auto& s : car.scenario.sources)
            clear = clear && (p - s.physical.center).norm() - s.physical.radius >= kResidualProbeClearance;
        if (clear)
            probes.push_back(p);
    }
    double worst = 0.0;
    for (const auto& lr : car.lines) {
        const WaveContext ctx(lr.line.k, car.config.medium);
        for (const auto& p : probes)
            worst = std::max(worst, helmholtz_residual(lr.line.density, car.scenario.sources, ctx, p, kHelmholtzStep));
    }
    verdict(4, worst <= kHelmholtzTol,
            fmt("Helmholtz residual of the car-cabin fields, %.0f probes x %.0f lines, h = %.0e: max %.2e",
                kHelmholtzProbes, static_cast<double>(car.lines.size()), kHelmholtzStep, worst) +
                fmt(" (tol %.0e)", kHelmholtzTol),
            t.seconds());
}

void criterion_car_static(const RunArtifacts& car, double seconds)
{
    const auto& s = car.summary;
    std::string lines;
    for (const auto& lr : car.lines)
        lines += fmt(" k=%g ", lr.line.k) + to_string(lr.status);
    verdict(5, s.target_sup_relative <= kCarTargetTol && s.null_sup <= kCarNullSupTol && s.null_median <= kCarNullMedianTol,
            fmt("car-cabin static: target sup rel %.4f (tol %.2f), null sup %.3g (tol %.0e)", s.target_sup_relative,
                kCarTargetTol, s.null_sup, kCarNullSupTol) +
                fmt(", null median %.3g (tol %.0e);", s.null_median, kCarNullMedianTol) + lines,
            seconds);
}

void criterion_phone_static(const RunArtifacts& phone, double seconds)
{
    const auto& lr = phone.lines.front();
    double near_median = 0.0, target_sup = 0.0, far_sup = 0.0;
    for (const auto& r : lr.line.report.regions) {
        if (r.role == RegionRole::target) {
            target_sup = std::max(target_sup, r.sup);
            std::vector<double> mags;
            for (const auto& u : r.field)
                mags.push_back(std::abs(u));
            std::nth_element(mags.begin(), mags.begin() + mags.size() / 2, mags.end());
            near_median = mags[mags.size() / 2];
        } else {
            far_sup = std::max(far_sup, r.sup);
        }
    }
    const bool ok = target_sup <= kPhoneTargetTol && far_sup <= kPhoneFarSupTol &&
                    far_sup <= kPhoneOrdersBelow * near_median;
    verdict(6, ok,
            fmt("phone static k=10: near sup rel %.4f (tol %.2f), far sup %.3g (tol %.0e)", target_sup,
                kPhoneTargetTol, far_sup, kPhoneFarSupTol) +
                fmt(", far/near-median ratio %.3g (tol %.0e); morozov ", far_sup / near_median, kPhoneOrdersBelow) +
                to_string(lr.status),
            seconds);
}

RunArtifacts reduced_sweep(const std::string& preset)
{
    auto cfg = load_config(preset_path(preset));
    cfg.sweep.k = kReducedSweep;
    RunOptions opts;
    opts.planes = false;
    opts.normal_velocity = false;
    return run_sweep(cfg, opts);
}

void criterion_sweeps()
{
    Timer t;
    const auto car = reduced_sweep("car_cabin");
    const double t_car = t.seconds();
    const auto phone = reduced_sweep("phone");
    const auto& cs = *car.sweep;
    const auto& ps = *phone.sweep;
    const bool ok = cs.target_error <= kCarSweepTol && cs.null_sup <= kCarSweepNullTol &&
                    ps.target_error <= kPhoneSweepTol && ps.null_sup <= kPhoneSweepNullTol;
    verdict(7, ok,
            fmt("reduced sweeps k in {1,5,...,50}: car time-avg rel error %.4f (tol %.2f), null %.3g (tol %.0e)",
                cs.target_error, kCarSweepTol, cs.null_sup, kCarSweepNullTol) +
                fmt("; phone %.4f (tol %.2f), null %.3g (tol %.0e)", ps.target_error, kPhoneSweepTol, ps.null_sup,
                    kPhoneSweepNullTol) +
                fmt("; car %.0f s, phone %.0f s", t_car, t.seconds() - t_car),
            t.seconds());
}

void criterion_window()
{
    Timer t;
    bool ok = true;
    std::string detail;
    for (const char* name : {"car_cabin", "phone"}) {
        const auto cfg = load_config(preset_path(name));
        const auto sc = build_scenario(cfg);
        const double T = cfg.sweep.source_duration;
        const auto w = valid_window(sc.regions, sc.sources, cfg.medium.c, T);
        ok = ok && w.t1 < w.t2;
        // (max - min distance) / c, the shortest feasible T
        const double t_min = w.t1 - (w.t2 - T);
        bool threw = false;
        try {
            (void)valid_window(sc.regions, sc.sources, cfg.medium.c, 0.99 * t_min);
        } catch (const GeometryError&) {
            threw = true;
        }
        const auto open = valid_window(sc.regions, sc.sources, cfg.medium.c, 1.01 * t_min);
        ok = ok && threw && open.t1 < open.t2;
        detail += std::string(" ") + name +
                  fmt(" T=%.2f: (t1, t2) = (%.4f, %.4f), minimal T %.4f", T, w.t1, w.t2, t_min) +
                  (threw ? ", rejects T below" : ", MISSING rejection") + ";";
    }
    verdict(8, ok, "window feasibility:" + detail, t.seconds());
}

void criterion_stability(const RunArtifacts& car, const RunArtifacts& phone)
{
    double worst = 0.0;
    bool complete = true;
    for (const auto* art : {&car, &phone})
        for (const auto& lr : art->lines) {
            complete = complete && lr.stability.has_value() && lr.stability->epsilon == kStabilityEpsilon;
            if (lr.stability)
                worst = std::max(worst, std::abs(lr.stability->perturbed_error - lr.stability->base_error));
        }
    verdict(9, complete && worst < kStabilityTol,
            fmt("stability, epsilon = %.0e on both presets: max change of sup rel error %.2e (tol %.0e)",
                kStabilityEpsilon, worst, kStabilityTol),
            0.0);
}

void criterion_determinism(const RunArtifacts& phone, const fs::path& root)
{
    Timer t;
    const auto again = run_static(phone.config);
    export_artifacts(phone, root / "phone_a");
    export_artifacts(again, root / "phone_b");
    const bool same = read_file(root / "phone_a" / "manifest.json") == read_file(root / "phone_b" / "manifest.json");
    const bool intact = verify_manifest(root / "phone_a").empty() && verify_manifest(root / "phone_b").empty();
    verdict(10, same && intact,
            std::string("determinism: two phone runs ") + (same ? "produce byte-identical manifests" : "DIFFER") +
                (intact ? "" : ", manifest verification failed"),
            t.seconds());
}

}  // namespace

int main(int argc, char** argv)
{
    const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "fieldctl_acceptance";
    fs::remove_all(root);

    auto guarded = [](int id, const std::function<void()>& body) {
        try {
            body();
        } catch (const std::exception& e) {
            verdict(id, false, std::string("threw: ") + e.what(), 0.0);
        }
    };

    guarded(1, criterion_quadrature);
    guarded(2, criterion_sphere_oracle);
    guarded(3, criterion_svd);

    std::optional<RunArtifacts> car, phone;
    double car_s = 0.0, phone_s = 0.0;
    guarded(5, [&] {
        Timer t;
        auto cfg = load_config(preset_path("car_cabin"));
        cfg.solver.stability_epsilon = kStabilityEpsilon;
        car = run_static(cfg);
        car_s = t.seconds();
    });
    if (car) {
        guarded(4, [&] { criterion_helmholtz(*car); });
        guarded(5, [&] { criterion_car_static(*car, car_s); });
    } else {
        verdict(4, false, "no car-cabin solution", 0.0);
    }
    guarded(6, [&] {
        Timer t;
        auto cfg = load_config(preset_path("phone"));
        cfg.solver.stability_epsilon = kStabilityEpsilon;
        phone = run_static(cfg);
        phone_s = t.seconds();
        criterion_phone_static(*phone, phone_s);
    });
    guarded(7, criterion_sweeps);
    guarded(8, criterion_window);
    if (car && phone)
        guarded(9, [&] { criterion_stability(*car, *phone); });
    else
        verdict(9, false, "static runs missing", 0.0);
    if (phone)
        guarded(10, [&] { criterion_determinism(*phone, root); });
    else
        verdict(10, false, "phone run missing", 0.0);

    fs::remove_all(root);
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
