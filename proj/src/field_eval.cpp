#include "fieldctl/field_eval.hpp"

#include <algorithm>
#include <cmath>

#include "fieldctl/error.hpp"
#include "fieldctl/parallel.hpp"

namespace fieldctl {

namespace {

double median_of(std::vector<double> v)
{
    if (v.empty())
        return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1)
        return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(v.begin(), mid);
    return 0.5 * (lower + upper);
}

}  // namespace

FieldReport make_report(std::span<const ControlRegion> regions, std::span<const Prescription> prescriptions,
                        std::span<const std::vector<cplx>> fields)
{
    if (prescriptions.size() != regions.size() || fields.size() != regions.size())
        throw Error("report needs one prescription and one field per region");

    FieldReport rep;
    for (std::size_t r = 0; r < regions.size(); ++r) {
        const auto& region = regions[r];
        const auto& pres = prescriptions[r];
        if (region.role == RegionRole::null && !pres.is_zero())
            throw ConfigError("null region " + region.name + " must carry the zero prescription");
        if (fields[r].size() != region.evaluation.size())
            throw Error("field length does not match evaluation points of region " + region.name);

        RegionReport rr;
        rr.name = region.name;
        rr.role = region.role;
        rr.relative = !pres.is_zero();
        rr.points = region.evaluation;
        rr.field = fields[r];
        rr.prescribed.reserve(rr.points.size());
        rr.values.reserve(rr.points.size());
        for (std::size_t i = 0; i < rr.points.size(); ++i) {
            const cplx f = pres.value(rr.points[i]);
            rr.prescribed.push_back(f);
            if (rr.relative) {
                double denom = std::abs(f);
                if (denom < kRelativeErrorFloor) {
                    denom = kRelativeErrorFloor;
                    ++rr.flagged;
                }
                rr.values.push_back(std::abs(f - rr.field[i]) / denom);
            } else {
                rr.values.push_back(std::abs(rr.field[i]));
            }
        }
        if (!rr.values.empty()) {
            rr.sup = *std::max_element(rr.values.begin(), rr.values.end());
            double sum = 0.0;
            for (double v : rr.values)
                sum += v;
            rr.mean = sum / static_cast<double>(rr.values.size());
            rr.median = median_of(rr.values);
        }
        if (rr.relative)
            rep.sup_relative_error = std::max(rep.sup_relative_error, rr.sup);
        else
            rep.null_sup_magnitude = std::max(rep.null_sup_magnitude, rr.sup);
        rep.regions.push_back(std::move(rr));
    }
    return rep;
}

FieldReport evaluate_report(const DensityVector& density, std::span<const SourcePair> sources,
                            const WaveContext& ctx, std::span<const ControlRegion> regions,
                            std::span<const Prescription> prescriptions)
{
    std::vector<std::vector<cplx>> fields;
    fields.reserve(regions.size());
    for (const auto& region : regions)
        fields.push_back(radiate(density, sources, ctx, region.evaluation));
    return make_report(regions, prescriptions, fields);
}

void validate(const PlaneSpec& spec)
{
    if (spec.nx < 2 || spec.ny < 2)
        throw ConfigError("plane grid needs at least 2 x 2 samples");
    if (!(spec.x_min < spec.x_max) || !(spec.y_min < spec.y_max))
        throw ConfigError("plane extent is empty");
    if (!(spec.clip_lo < spec.clip_hi))
        throw ConfigError("plane clip range is empty");
}

Point3 PlaneGrid::point(int ix, int iy) const
{
    const double x = spec.x_min + (spec.x_max - spec.x_min) * ix / (spec.nx - 1);
    const double y = spec.y_min + (spec.y_max - spec.y_min) * iy / (spec.ny - 1);
    return {x, y, spec.z};
}

double PlaneGrid::clipped_real(std::size_t i) const
{
    if (mask[i])
        return 0.0;
    return std::clamp(values[i].real(), spec.clip_lo, spec.clip_hi);
}

bool PlaneGrid::operator==(const PlaneGrid& o) const
{
    const auto& a = spec;
    const auto& b = o.spec;
    return a.z == b.z && a.x_min == b.x_min && a.x_max == b.x_max && a.y_min == b.y_min && a.y_max == b.y_max &&
           a.nx == b.nx && a.ny == b.ny && a.clip_lo == b.clip_lo && a.clip_hi == b.clip_hi && values == o.values &&
           mask == o.mask;
}

PlaneGrid plane_layout(std::span<const SourcePair> sources, const PlaneSpec& spec)
{
    validate(spec);
    PlaneGrid grid;
    grid.spec = spec;
    const auto n = static_cast<std::size_t>(spec.nx) * spec.ny;
    grid.values.assign(n, cplx{});
    grid.mask.assign(n, 0);
    for (int iy = 0; iy < spec.ny; ++iy) {
        for (int ix = 0; ix < spec.nx; ++ix) {
            const Point3 p = grid.point(ix, iy);
            for (const auto& s : sources) {
                if ((p - s.physical.center).norm() <= s.physical.radius) {
                    grid.mask[grid.index(ix, iy)] = 1;
                    break;
                }
            }
        }
    }
    return grid;
}

PlaneGrid cut_plane(const DensityVector& density, std::span<const SourcePair> sources, const WaveContext& ctx,
                    const PlaneSpec& spec)
{
    PlaneGrid grid = plane_layout(sources, spec);
    std::vector<Point3> pts;
    std::vector<std::size_t> where;
    for (int iy = 0; iy < spec.ny; ++iy) {
        for (int ix = 0; ix < spec.nx; ++ix) {
            const auto i = grid.index(ix, iy);
            if (!grid.mask[i]) {
                pts.push_back(grid.point(ix, iy));
                where.push_back(i);
            }
        }
    }
    const auto vals = radiate(density, sources, ctx, pts);
    for (std::size_t j = 0; j < vals.size(); ++j)
        grid.values[where[j]] = vals[j];
    return grid;
}

double helmholtz_residual(const std::function<cplx(const Point3&)>& field, double k, const Point3& probe, double h)
{
    if (!(h >= 1e-4 && h <= 1e-2))
        throw ConfigError("finite-difference step must lie in [1e-4, 1e-2]");
    const cplx u0 = field(probe);
    cplx lap{};
    for (int axis = 0; axis < 3; ++axis) {
        Vec3 e = Vec3::Zero();
        e[axis] = h;
        lap += field(probe + e) + field(probe - e) - 2.0 * u0;
    }
    lap /= h * h;
    return std::abs(lap + k * k * u0) / (k * k * std::abs(u0) + 1e-300);
}

double helmholtz_residual(const DensityVector& density, std::span<const SourcePair> sources, const WaveContext& ctx,
                          const Point3& probe, double h)
{
    for (std::size_t s = 0; s < sources.size(); ++s) {
        const double gap = (probe - sources[s].physical.center).norm() - sources[s].physical.radius;
        if (gap < kResidualProbeClearance)
            throw GeometryError("residual probe closer than 0.1 m to source " + std::to_string(s));
    }
    const SingleLayer op(sources);
    return helmholtz_residual([&](const Point3& x) { return op.evaluate(x, ctx.k(), density); }, ctx.k(), probe, h);
}

}  // namespace fieldctl
