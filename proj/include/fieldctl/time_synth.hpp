#pragma once

#include <span>
#include <vector>

#include "fieldctl/field_eval.hpp"

namespace fieldctl {

/// One solved wavenumber of a broadband scene.
struct FrequencyLine {
    double k = 0.0;
    double omega = 0.0;  // k * c
    DensityVector density;
    std::vector<Prescription> prescriptions;  // per region
    FieldReport report;
    double alpha = 0.0;
};

FrequencyLine make_line(double k, const Medium& medium, DensityVector density,
                        std::vector<Prescription> prescriptions);

/// Interval (t1, t2) in which the windowed source reproduces the harmonic
/// field at every control point. T is the source-on duration.
struct TimeWindow {
    double t1 = 0.0;
    double t2 = 0.0;
    double T = 0.0;

    bool contains(double t) const { return t > t1 && t < t2; }
};

/// t1 = max_x max_y |x-y| / c, t2 = min_x min_y |x-y| / c + T over all
/// collocation and evaluation points x and physical source surfaces y.
/// Throws GeometryError (naming the minimal feasible T) when t1 >= t2.
TimeWindow valid_window(std::span<const ControlRegion> regions, std::span<const SourcePair> sources, double c,
                        double T);

/// H(t - r/c) - H(t - T - r/c) with H(0) = 1.
double retarded_window_factor(double r, double t, double c, double T);

/// Time-domain feed e^{-i omega t} w(y) (H(t) - H(t - T)) at vertex `dof`.
cplx windowed_source_signal(const FrequencyLine& line, std::size_t dof, double t, double T);

/// Per-line fields at fixed points, so that the superposition
///   u(x, t) = sum_q e^{-i omega_q t} u_q(x)
/// costs one pass over the lines per time sample.
class TimeScene {
public:
    TimeScene(std::span<const FrequencyLine> lines, std::span<const SourcePair> sources, const Medium& medium,
              std::span<const Point3> points);

    /// Builds the scene from precomputed per-line fields (fields[q][i]) and
    /// per-line prescribed values.
    TimeScene(std::vector<double> omegas, std::vector<std::vector<cplx>> generated,
              std::vector<std::vector<cplx>> prescribed);

    std::size_t point_count() const { return point_count_; }
    std::size_t line_count() const { return omegas_.size(); }

    std::vector<cplx> generated(double t) const;
    std::vector<cplx> prescribed(double t) const;

private:
    std::vector<cplx> superpose(const std::vector<std::vector<cplx>>& per_line, double t) const;

    std::vector<double> omegas_;
    std::vector<std::vector<cplx>> generated_;
    std::vector<std::vector<cplx>> prescribed_;
    std::size_t point_count_ = 0;
};

/// sum_q e^{-i omega_q t} radiate(density_q)(x).
std::vector<cplx> synthesize_scene(std::span<const FrequencyLine> lines, std::span<const SourcePair> sources,
                                   const Medium& medium, std::span<const Point3> points, double t);

enum class AverageConvention { real_part, magnitude };

struct TimeAverage {
    std::vector<double> times;
    std::vector<double> generated;           // mean over t of Re u (or |u|)
    std::vector<double> prescribed;          // same for f
    std::vector<double> relative_error;      // mean over t of |f-u|/|f|, empty if f == 0
    std::vector<double> rms_relative_error;  // ||f-u||_t / ||f||_t, empty if f == 0
};

/// Uniform samples t_s = s * horizon / n_samples, s = 0..n_samples-1.
std::vector<double> sample_times(double horizon, int n_samples);

TimeAverage time_average(const TimeScene& scene, double horizon, int n_samples,
                         AverageConvention convention = AverageConvention::real_part);

}  // namespace fieldctl
