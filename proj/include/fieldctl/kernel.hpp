#pragma once

#include <complex>

#include "fieldctl/geometry.hpp"

namespace fieldctl {

using cplx = std::complex<double>;
using CVec3 = Eigen::Vector3cd;

struct Medium {
    double c = 343.0;     // speed of sound, m/s
    double rho = 1.225;   // mass density, kg/m^3
};

void validate(const Medium& m);

/// Fixed-frequency context; omega is always derived from k and c.
class WaveContext {
public:
    WaveContext(double k, Medium medium = {});

    double k() const { return k_; }
    double omega() const { return omega_; }
    double frequency_hz() const;
    const Medium& medium() const { return medium_; }

private:
    double k_;
    double omega_;
    Medium medium_;
};

struct PlaneWaveSpec {
    double k = 1.0;
    Vec3 direction = Vec3::UnitY();
};

/// Normalizes nothing: throws unless |direction| = 1 within 1e-12 and k > 0.
void validate(const PlaneWaveSpec& spec);

inline constexpr double kCoincidentGuard = 1e-9;

/// Outgoing free-space Helmholtz kernel e^{ikr} / (4 pi r).
cplx greens(const Point3& x, const Point3& y, double k);

/// Gradient of greens with respect to x.
CVec3 grad_greens_x(const Point3& x, const Point3& y, double k);

cplx plane_wave(const Point3& x, const PlaneWaveSpec& spec);

}  // namespace fieldctl
