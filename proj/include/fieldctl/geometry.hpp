#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace fieldctl {

using Point3 = Eigen::Vector3d;
using Vec3 = Eigen::Vector3d;

struct SphereSpec {
    Point3 center = Point3::Zero();
    double radius = 1.0;
};

void validate(const SphereSpec& s);

/// Closed triangulated surface. Triangles are stored counter-clockwise when
/// seen from outside, so the right-hand normal points outward.
struct TriMesh {
    std::vector<Point3> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<Vec3> vertex_normals;

    std::size_t vertex_count() const { return vertices.size(); }
    std::size_t triangle_count() const { return triangles.size(); }
};

double triangle_area(const Point3& a, const Point3& b, const Point3& c);
double triangle_diameter(const Point3& a, const Point3& b, const Point3& c);
double surface_area(const TriMesh& mesh);
double max_triangle_diameter(const TriMesh& mesh);

/// True when every undirected edge is shared by exactly two triangles and
/// each is traversed once in each direction (consistent orientation).
bool is_closed_oriented(const TriMesh& mesh);

/// Latitude-longitude sphere: `rings` latitude circles of `sectors` vertices
/// each, plus the two poles.
TriMesh triangulate_sphere(const SphereSpec& spec, int rings, int sectors);

/// Physical source D_j together with the fictitious sphere D'_j carrying the
/// density. Both meshes share the angular layout.
struct SourcePair {
    SphereSpec physical;
    SphereSpec fictitious;
    TriMesh mesh;           // on the fictitious sphere
    TriMesh physical_mesh;  // on the physical sphere
};

struct MeshResolution {
    int rings = 8;
    int sectors = 29;
};

SourcePair make_source_pair(const Point3& center, double physical_radius,
                            double fictitious_ratio = 0.8,
                            MeshResolution res = {});

enum class RegionRole { target, null };

std::string to_string(RegionRole role);

struct ControlRegion {
    std::string name;
    SphereSpec sphere;
    RegionRole role = RegionRole::target;
    std::vector<Point3> collocation;
    std::vector<Point3> evaluation;
};

ControlRegion make_control_region(std::string name, const SphereSpec& sphere,
                                  RegionRole role, int collocation_count);

/// Fibonacci-sphere point set, deterministic in n.
std::vector<Point3> collocation_points(const SphereSpec& sphere, int n);

/// Midpoints of consecutive points, pushed back onto the sphere.
std::vector<Point3> evaluation_points(std::span<const Point3> collocation,
                                      const SphereSpec& sphere);

enum class PerimeterStart { mid_spacing, corner };

/// n centers spread at equal arc length along the perimeter of a
/// width x height rectangle in the z = 0 plane, centered at the origin.
/// Width runs along x. The walk starts at the (-w/2, -h/2) corner.
std::vector<Point3> phone_array_layout(double width, double height, int n,
                                       PerimeterStart start = PerimeterStart::mid_spacing);

/// Smallest surface-to-surface gap between any two sources and between any
/// source and any control region. Throws GeometryError on overlap.
double min_separation(std::span<const SourcePair> sources,
                      std::span<const ControlRegion> regions);

/// Gap between two sphere surfaces; negative when they intersect. Handles
/// containment (one sphere strictly inside the other).
double sphere_gap(const SphereSpec& a, const SphereSpec& b);

}  // namespace fieldctl
