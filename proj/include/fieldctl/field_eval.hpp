#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fieldctl/bem.hpp"

namespace fieldctl {

/// Field prescribed on one control region at one wavenumber: a plane wave,
/// or zero (null spheres, and target regions silent at this wavenumber).
struct Prescription {
    std::optional<PlaneWaveSpec> wave;

    bool is_zero() const { return !wave.has_value(); }
    cplx value(const Point3& x) const { return wave ? plane_wave(x, *wave) : cplx{}; }
};

inline constexpr double kRelativeErrorFloor = 1e-12;

struct RegionReport {
    std::string name;
    RegionRole role = RegionRole::target;
    bool relative = false;               // true: values are relative errors
    std::vector<Point3> points;
    std::vector<cplx> field;             // generated u
    std::vector<cplx> prescribed;        // f
    std::vector<double> values;          // |f-u|/|f| or |u|
    double sup = 0.0;
    double median = 0.0;
    double mean = 0.0;
    int flagged = 0;                     // points where |f| fell below the floor
};

struct FieldReport {
    std::vector<RegionReport> regions;
    double sup_relative_error = 0.0;     // over regions with a nonzero prescription
    double null_sup_magnitude = 0.0;     // over regions prescribed zero
};

/// Builds the report from already computed fields (one vector per region,
/// aligned with that region's evaluation points).
FieldReport make_report(std::span<const ControlRegion> regions, std::span<const Prescription> prescriptions,
                        std::span<const std::vector<cplx>> fields);

/// Radiates the density to every region's evaluation points and compares
/// against the prescriptions.
FieldReport evaluate_report(const DensityVector& density, std::span<const SourcePair> sources,
                            const WaveContext& ctx, std::span<const ControlRegion> regions,
                            std::span<const Prescription> prescriptions);

struct PlaneSpec {
    double z = 0.0;
    double x_min = -1.0, x_max = 1.0;
    double y_min = -1.0, y_max = 1.0;
    int nx = 41, ny = 41;
    double clip_lo = -1.0, clip_hi = 1.0;
};

void validate(const PlaneSpec& spec);

/// Grid on the plane z = z0, row-major in y then x. Values are complex; the
/// export carries Re u clipped to [clip_lo, clip_hi] next to the raw value.
struct PlaneGrid {
    PlaneSpec spec;
    std::vector<cplx> values;
    std::vector<std::uint8_t> mask;  // 1 = inside a physical source, not evaluated

    Point3 point(int ix, int iy) const;
    std::size_t index(int ix, int iy) const { return static_cast<std::size_t>(iy) * spec.nx + ix; }
    double clipped_real(std::size_t i) const;

    bool operator==(const PlaneGrid&) const;
};

/// Grid points in the plane, with the mask already decided.
PlaneGrid plane_layout(std::span<const SourcePair> sources, const PlaneSpec& spec);

PlaneGrid cut_plane(const DensityVector& density, std::span<const SourcePair> sources, const WaveContext& ctx,
                    const PlaneSpec& spec);

/// |Delta_h u + k^2 u| / (k^2 |u| + tiny) with the 7-point stencil.
double helmholtz_residual(const std::function<cplx(const Point3&)>& field, double k, const Point3& probe, double h);

/// Same for the radiated single-layer field. The probe must be at least
/// 0.1 m from every physical source surface.
double helmholtz_residual(const DensityVector& density, std::span<const SourcePair> sources, const WaveContext& ctx,
                          const Point3& probe, double h);

inline constexpr double kResidualProbeClearance = 0.1;

}  // namespace fieldctl
