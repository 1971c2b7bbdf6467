#include "fieldctl/kernel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fieldctl/error.hpp"

namespace fieldctl {

void validate(const Medium& m)
{
    if (!(m.c > 0.0) || !(m.rho > 0.0))
        throw ConfigError("medium needs c > 0 and rho > 0");
}

WaveContext::WaveContext(double k, Medium medium)
    : k_(k), omega_(k * medium.c), medium_(medium)
{
    validate(medium_);
    if (!(k > 0.0) || !std::isfinite(k))
        throw ConfigError("wavenumber must be positive, got " + std::to_string(k));
}

double WaveContext::frequency_hz() const
{
    return omega_ / (2.0 * std::numbers::pi);
}

void validate(const PlaneWaveSpec& spec)
{
    if (!(spec.k > 0.0))
        throw ConfigError("plane wave needs k > 0");
    if (std::abs(spec.direction.norm() - 1.0) > 1e-12)
        throw ConfigError("plane wave direction must be a unit vector");
}

namespace {

double checked_distance(const Point3& x, const Point3& y)
{
    const double r = (x - y).norm();
    if (!(r >= kCoincidentGuard))
        throw GeometryError("kernel evaluated at coincident points (|x-y| = " + std::to_string(r) + ")");
    return r;
}

}  // namespace

cplx greens(const Point3& x, const Point3& y, double k)
{
    const double r = checked_distance(x, y);
    const double kr = k * r;
    return cplx(std::cos(kr), std::sin(kr)) / (4.0 * std::numbers::pi * r);
}

CVec3 grad_greens_x(const Point3& x, const Point3& y, double k)
{
    const double r = checked_distance(x, y);
    const double kr = k * r;
    const cplx phi = cplx(std::cos(kr), std::sin(kr)) / (4.0 * std::numbers::pi * r);
    const cplx radial = (cplx(0.0, k) - 1.0 / r) * phi / r;
    const Vec3 d = x - y;
    return CVec3(radial * d.x(), radial * d.y(), radial * d.z());
}

cplx plane_wave(const Point3& x, const PlaneWaveSpec& spec)
{
    const double phase = spec.k * x.dot(spec.direction);
    return {std::cos(phase), std::sin(phase)};
}

}  // namespace fieldctl
