#include "fieldctl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <utility>

#include "fieldctl/error.hpp"

namespace fieldctl {

void validate(const SphereSpec& s)
{
    if (!(s.radius > 0.0) || !std::isfinite(s.radius))
        throw GeometryError("sphere radius must be positive, got " + std::to_string(s.radius));
    if (!s.center.allFinite())
        throw GeometryError("sphere center is not finite");
}

double triangle_area(const Point3& a, const Point3& b, const Point3& c)
{
    return 0.5 * (b - a).cross(c - a).norm();
}

double triangle_diameter(const Point3& a, const Point3& b, const Point3& c)
{
    return std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
}

double surface_area(const TriMesh& mesh)
{
    double area = 0.0;
    for (const auto& t : mesh.triangles)
        area += triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    return area;
}

double max_triangle_diameter(const TriMesh& mesh)
{
    double d = 0.0;
    for (const auto& t : mesh.triangles)
        d = std::max(d, triangle_diameter(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]));
    return d;
}

bool is_closed_oriented(const TriMesh& mesh)
{
    // directed edge -> count; a closed, consistently oriented surface uses
    // each directed edge once and its reverse once.
    std::map<std::pair<int, int>, int> directed;
    for (const auto& t : mesh.triangles) {
        for (int e = 0; e < 3; ++e) {
            const int a = t[e];
            const int b = t[(e + 1) % 3];
            if (a == b)
                return false;
            ++directed[{a, b}];
        }
    }
    for (const auto& [edge, count] : directed) {
        if (count != 1)
            return false;
        auto rev = directed.find({edge.second, edge.first});
        if (rev == directed.end() || rev->second != 1)
            return false;
    }
    return true;
}

TriMesh triangulate_sphere(const SphereSpec& spec, int rings, int sectors)
{
    validate(spec);
    if (rings < 3 || sectors < 3)
        throw GeometryError("triangulate_sphere needs rings >= 3 and sectors >= 3");

    TriMesh mesh;
    const auto nv = static_cast<std::size_t>(rings) * sectors + 2;
    mesh.vertices.reserve(nv);
    mesh.vertex_normals.reserve(nv);

    auto push = [&](const Vec3& dir) {
        mesh.vertex_normals.push_back(dir);
        mesh.vertices.push_back(spec.center + spec.radius * dir);
    };

    push(Vec3(0.0, 0.0, 1.0));
    for (int i = 1; i <= rings; ++i) {
        const double theta = std::numbers::pi * i / (rings + 1);
        const double st = std::sin(theta);
        const double ct = std::cos(theta);
        for (int j = 0; j < sectors; ++j) {
            const double phi = 2.0 * std::numbers::pi * j / sectors;
            push(Vec3(st * std::cos(phi), st * std::sin(phi), ct));
        }
    }
    push(Vec3(0.0, 0.0, -1.0));

    const int south = static_cast<int>(nv) - 1;
    auto ring_vertex = [&](int ring, int sector) { return 1 + ring * sectors + (sector % sectors); };

    mesh.triangles.reserve(static_cast<std::size_t>(2) * sectors * rings);
    for (int j = 0; j < sectors; ++j)
        mesh.triangles.push_back({0, ring_vertex(0, j), ring_vertex(0, j + 1)});
    for (int i = 0; i + 1 < rings; ++i) {
        for (int j = 0; j < sectors; ++j) {
            const int a = ring_vertex(i, j);
            const int b = ring_vertex(i, j + 1);
            const int c = ring_vertex(i + 1, j);
            const int d = ring_vertex(i + 1, j + 1);
            mesh.triangles.push_back({a, c, d});
            mesh.triangles.push_back({a, d, b});
        }
    }
    for (int j = 0; j < sectors; ++j)
        mesh.triangles.push_back({south, ring_vertex(rings - 1, j + 1), ring_vertex(rings - 1, j)});

    return mesh;
}

SourcePair make_source_pair(const Point3& center, double physical_radius,
                            double fictitious_ratio, MeshResolution res)
{
    if (!(fictitious_ratio > 0.0 && fictitious_ratio < 1.0))
        throw GeometryError("fictitious radius ratio must lie in (0, 1)");
    SourcePair pair;
    pair.physical = {center, physical_radius};
    pair.fictitious = {center, physical_radius * fictitious_ratio};
    validate(pair.physical);
    pair.mesh = triangulate_sphere(pair.fictitious, res.rings, res.sectors);
    pair.physical_mesh = triangulate_sphere(pair.physical, res.rings, res.sectors);
    return pair;
}

std::string to_string(RegionRole role)
{
    return role == RegionRole::target ? "target" : "null";
}

ControlRegion make_control_region(std::string name, const SphereSpec& sphere,
                                  RegionRole role, int collocation_count)
{
    ControlRegion region;
    region.name = std::move(name);
    region.sphere = sphere;
    region.role = role;
    region.collocation = collocation_points(sphere, collocation_count);
    region.evaluation = evaluation_points(region.collocation, sphere);
    return region;
}

std::vector<Point3> collocation_points(const SphereSpec& sphere, int n)
{
    validate(sphere);
    if (n < 4)
        throw GeometryError("collocation_points needs n >= 4, got " + std::to_string(n));

    const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
    std::vector<Point3> pts;
    pts.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double z = 1.0 - (2.0 * i + 1.0) / n;
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden_angle * i;
        const Vec3 dir(rho * std::cos(phi), rho * std::sin(phi), z);
        pts.push_back(sphere.center + sphere.radius * dir.normalized());
    }
    return pts;
}

std::vector<Point3> evaluation_points(std::span<const Point3> collocation, const SphereSpec& sphere)
{
    validate(sphere);
    if (collocation.size() < 2)
        throw GeometryError("evaluation_points needs at least two collocation points");

    std::vector<Point3> pts;
    pts.reserve(collocation.size() - 1);
    for (std::size_t i = 0; i + 1 < collocation.size(); ++i) {
        const Vec3 mid = 0.5 * (collocation[i] + collocation[i + 1]) - sphere.center;
        const double len = mid.norm();
        if (len <= 1e-12 * sphere.radius)
            throw GeometryError("midpoint of points " + std::to_string(i) + " and " + std::to_string(i + 1) +
                                " coincides with the sphere center; projection undefined");
        pts.push_back(sphere.center + sphere.radius * (mid / len));
    }
    return pts;
}

std::vector<Point3> phone_array_layout(double width, double height, int n, PerimeterStart start)
{
    if (!(width > 0.0) || !(height > 0.0))
        throw GeometryError("rectangle width and height must be positive");
    if (n < 4 || n % 2 != 0)
        throw GeometryError("phone layout needs an even count >= 4 so the array stays point-symmetric, got " +
                            std::to_string(n));

    const double perimeter = 2.0 * (width + height);
    const double step = perimeter / n;
    const double offset = start == PerimeterStart::mid_spacing ? 0.5 * step : 0.0;
    const double hw = 0.5 * width;
    const double hh = 0.5 * height;

    std::vector<Point3> centers;
    centers.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double s = offset + step * i;
        Point3 p;
        if (s < width) {
            p = {-hw + s, -hh, 0.0};
        } else if ((s -= width) < height) {
            p = {hw, -hh + s, 0.0};
        } else if ((s -= height) < width) {
            p = {hw - s, hh, 0.0};
        } else {
            s -= width;
            p = {-hw, hh - s, 0.0};
        }
        centers.push_back(p);
    }
    return centers;
}

double sphere_gap(const SphereSpec& a, const SphereSpec& b)
{
    const double d = (a.center - b.center).norm();
    if (d + a.radius < b.radius)
        return b.radius - d - a.radius;
    if (d + b.radius < a.radius)
        return a.radius - d - b.radius;
    return d - a.radius - b.radius;
}

double min_separation(std::span<const SourcePair> sources, std::span<const ControlRegion> regions)
{
    if (sources.empty())
        throw GeometryError("min_separation needs at least one source");

    double best = std::numeric_limits<double>::infinity();
    auto check = [&](double gap, const std::string& what) {
        if (!(gap > 0.0))
            throw GeometryError("geometry overlap: " + what + " (gap " + std::to_string(gap) + " m)");
        best = std::min(best, gap);
    };

    for (std::size_t i = 0; i < sources.size(); ++i) {
        if (!(sources[i].fictitious.radius < sources[i].physical.radius))
            throw GeometryError("fictitious sphere of source " + std::to_string(i) + " is not compactly embedded");
        const SphereSpec& si = sources[i].physical;
        // sources are solid bodies: nesting one inside another is an overlap
        for (std::size_t j = i + 1; j < sources.size(); ++j) {
            const SphereSpec& sj = sources[j].physical;
            check((si.center - sj.center).norm() - si.radius - sj.radius,
                  "source " + std::to_string(i) + " / source " + std::to_string(j));
        }
        // a control sphere may enclose sources (null sphere) but not sit inside one
        for (const auto& r : regions) {
            const std::string what = "source " + std::to_string(i) + " / region " + r.name;
            if ((si.center - r.sphere.center).norm() + r.sphere.radius <= si.radius)
                check(-1.0 * (si.radius - r.sphere.radius), what);
            check(sphere_gap(si, r.sphere), what);
        }
    }
    return best;
}

}  // namespace fieldctl
