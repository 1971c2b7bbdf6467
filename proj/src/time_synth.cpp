#include "fieldctl/time_synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fieldctl/error.hpp"
#include "fieldctl/parallel.hpp"

namespace fieldctl {

FrequencyLine make_line(double k, const Medium& medium, DensityVector density, std::vector<Prescription> prescriptions)
{
    const WaveContext ctx(k, medium);
    FrequencyLine line;
    line.k = ctx.k();
    line.omega = ctx.omega();
    line.density = std::move(density);
    line.prescriptions = std::move(prescriptions);
    return line;
}

TimeWindow valid_window(std::span<const ControlRegion> regions, std::span<const SourcePair> sources, double c,
                        double T)
{
    if (!(T > 0.0))
        throw ConfigError("source-on duration T must be positive");
    if (!(c > 0.0))
        throw ConfigError("speed of sound must be positive");
    if (regions.empty() || sources.empty())
        throw GeometryError("validity window needs regions and sources");

    double far = 0.0;
    double near = std::numeric_limits<double>::infinity();
    auto visit = [&](const Point3& x) {
        for (const auto& s : sources) {
            const double d = (x - s.physical.center).norm();
            far = std::max(far, d + s.physical.radius);
            near = std::min(near, std::max(0.0, d - s.physical.radius));
        }
    };
    for (const auto& r : regions) {
        for (const auto& x : r.collocation)
            visit(x);
        for (const auto& x : r.evaluation)
            visit(x);
    }

    TimeWindow w;
    w.T = T;
    w.t1 = far / c;
    w.t2 = near / c + T;
    if (!(w.t1 < w.t2))
        throw GeometryError("validity window is empty: t1 = " + std::to_string(w.t1) + " s >= t2 = " +
                            std::to_string(w.t2) + " s; T must exceed " + std::to_string((far - near) / c) + " s");
    return w;
}

double retarded_window_factor(double r, double t, double c, double T)
{
    auto heaviside = [](double s) { return s >= 0.0 ? 1.0 : 0.0; };
    return heaviside(t - r / c) - heaviside(t - T - r / c);
}

cplx windowed_source_signal(const FrequencyLine& line, std::size_t dof, double t, double T)
{
    if (dof >= static_cast<std::size_t>(line.density.size()))
        throw Error("degree of freedom out of range");
    const double window = retarded_window_factor(0.0, t, 1.0, T);
    if (window == 0.0)
        return {};
    return std::polar(1.0, -line.omega * t) * line.density[static_cast<Eigen::Index>(dof)];
}

TimeScene::TimeScene(std::span<const FrequencyLine> lines, std::span<const SourcePair> sources, const Medium& medium,
                     std::span<const Point3> points)
    : point_count_(points.size())
{
    for (const auto& line : lines) {
        const WaveContext ctx(line.k, medium);
        omegas_.push_back(ctx.omega());
        generated_.push_back(radiate(line.density, sources, ctx, points));
        prescribed_.emplace_back(points.size(), cplx{});
    }
}

TimeScene::TimeScene(std::vector<double> omegas, std::vector<std::vector<cplx>> generated,
                     std::vector<std::vector<cplx>> prescribed)
    : omegas_(std::move(omegas)), generated_(std::move(generated)), prescribed_(std::move(prescribed))
{
    if (generated_.size() != omegas_.size() || prescribed_.size() != omegas_.size())
        throw Error("scene needs one generated and one prescribed field per line");
    point_count_ = generated_.empty() ? 0 : generated_.front().size();
    for (std::size_t q = 0; q < omegas_.size(); ++q)
        if (generated_[q].size() != point_count_ || prescribed_[q].size() != point_count_)
            throw Error("scene lines disagree on the number of points");
}

std::vector<cplx> TimeScene::superpose(const std::vector<std::vector<cplx>>& per_line, double t) const
{
    std::vector<cplx> out(point_count_, cplx{});
    for (std::size_t q = 0; q < omegas_.size(); ++q) {
        const cplx phase = std::polar(1.0, -omegas_[q] * t);
        const auto& u = per_line[q];
        for (std::size_t i = 0; i < point_count_; ++i)
            out[i] += phase * u[i];
    }
    return out;
}

std::vector<cplx> TimeScene::generated(double t) const
{
    return superpose(generated_, t);
}

std::vector<cplx> TimeScene::prescribed(double t) const
{
    return superpose(prescribed_, t);
}

std::vector<cplx> synthesize_scene(std::span<const FrequencyLine> lines, std::span<const SourcePair> sources,
                                   const Medium& medium, std::span<const Point3> points, double t)
{
    return TimeScene(lines, sources, medium, points).generated(t);
}

std::vector<double> sample_times(double horizon, int n_samples)
{
    if (!(horizon > 0.0))
        throw ConfigError("time horizon must be positive");
    if (n_samples < 16)
        throw ConfigError("time averaging needs at least 16 samples");
    std::vector<double> t(static_cast<std::size_t>(n_samples));
    for (int s = 0; s < n_samples; ++s)
        t[static_cast<std::size_t>(s)] = horizon * s / n_samples;
    return t;
}

TimeAverage time_average(const TimeScene& scene, double horizon, int n_samples, AverageConvention convention)
{
    TimeAverage avg;
    avg.times = sample_times(horizon, n_samples);
    const std::size_t n = scene.point_count();
    avg.generated.assign(n, 0.0);
    avg.prescribed.assign(n, 0.0);
    std::vector<double> rel_sum(n, 0.0), err_sq(n, 0.0), ref_sq(n, 0.0);
    bool any_prescribed = false;

    auto reduce = [&](cplx z) { return convention == AverageConvention::real_part ? z.real() : std::abs(z); };
    for (double t : avg.times) {
        const auto u = scene.generated(t);
        const auto f = scene.prescribed(t);
        for (std::size_t i = 0; i < n; ++i) {
            avg.generated[i] += reduce(u[i]);
            avg.prescribed[i] += reduce(f[i]);
            const double fa = std::abs(f[i]);
            const double ea = std::abs(f[i] - u[i]);
            any_prescribed = any_prescribed || fa > 0.0;
            rel_sum[i] += ea / std::max(fa, kRelativeErrorFloor);
            err_sq[i] += ea * ea;
            ref_sq[i] += fa * fa;
        }
    }
    const double inv = 1.0 / static_cast<double>(n_samples);
    for (std::size_t i = 0; i < n; ++i) {
        avg.generated[i] *= inv;
        avg.prescribed[i] *= inv;
    }
    if (any_prescribed) {
        avg.relative_error.resize(n);
        avg.rms_relative_error.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            avg.relative_error[i] = rel_sum[i] * inv;
            avg.rms_relative_error[i] = std::sqrt(err_sq[i] / std::max(ref_sq[i], kRelativeErrorFloor));
        }
    }
    return avg;
}

}  // namespace fieldctl
