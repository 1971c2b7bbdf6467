#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "fieldctl/error.hpp"
#include "fieldctl/geometry.hpp"

using namespace fieldctl;

namespace {

const double kPi = std::numbers::pi;

std::vector<double> nearest_neighbor_spacing(const std::vector<Point3>& pts)
{
    std::vector<double> out(pts.size(), std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < pts.size(); ++j)
            if (i != j)
                out[i] = std::min(out[i], (pts[i] - pts[j]).norm());
    return out;
}

}  // namespace

TEST_CASE("triangulate_sphere vertex count")
{
    const SphereSpec s{Point3::Zero(), 1.0};
    CHECK(triangulate_sphere(s, 29, 8).vertex_count() == 234);
    CHECK(triangulate_sphere(s, 8, 29).vertex_count() == 234);
    const MeshResolution def;
    CHECK(def.rings * def.sectors + 2 == 234);
}

TEST_CASE("default 234-vertex mesh area within 2 percent of the sphere")
{
    const SphereSpec s{Point3(0.3, -0.2, 0.1), 0.04};
    const MeshResolution def;
    const TriMesh m = triangulate_sphere(s, def.rings, def.sectors);
    const double exact = 4.0 * kPi * s.radius * s.radius;
    const double ratio = surface_area(m) / exact;
    CHECK(ratio < 1.0);
    CHECK(ratio > 0.98);
}

TEST_CASE("29 rings by 8 sectors underestimates area by about 5 percent")
{
    // with only 8 sectors every band is an octagonal prism slice, which is
    // why the default puts the 29 on the longitude count instead
    const TriMesh m = triangulate_sphere({Point3::Zero(), 1.0}, 29, 8);
    const double ratio = surface_area(m) / (4.0 * kPi);
    CHECK(ratio < 0.98);
    CHECK(ratio == doctest::Approx(0.9488).epsilon(1e-3));
}

TEST_CASE("vertices lie on the sphere")
{
    const TriMesh m = triangulate_sphere({Point3::Zero(), 1.0}, 29, 8);
    double worst = 0.0;
    for (const auto& v : m.vertices)
        worst = std::max(worst, std::abs(v.norm() - 1.0));
    CHECK(worst <= 2.0 * std::numeric_limits<double>::epsilon());

    const SphereSpec off{Point3(1.0, 2.0, -3.0), 0.05};
    const TriMesh m2 = triangulate_sphere(off, 8, 29);
    for (const auto& v : m2.vertices)
        CHECK(std::abs((v - off.center).norm() - off.radius) <= 1e-12 * off.radius);
}

TEST_CASE("mesh is closed, oriented, nondegenerate, normals outward")
{
    const SphereSpec s{Point3(0.5, 0.0, -0.25), 0.2};
    for (auto [r, sec] : {std::pair{3, 3}, std::pair{8, 29}, std::pair{29, 8}, std::pair{16, 58}}) {
        const TriMesh m = triangulate_sphere(s, r, sec);
        CHECK(is_closed_oriented(m));
        CHECK(m.triangle_count() == 2 * m.vertex_count() - 4);  // Euler, genus 0
        for (const auto& t : m.triangles) {
            const Point3& a = m.vertices[t[0]];
            const Point3& b = m.vertices[t[1]];
            const Point3& c = m.vertices[t[2]];
            CHECK(triangle_area(a, b, c) > 0.0);
            const Vec3 n = (b - a).cross(c - a);
            CHECK(n.dot((a + b + c) / 3.0 - s.center) > 0.0);
        }
        for (std::size_t i = 0; i < m.vertex_count(); ++i) {
            CHECK(std::abs(m.vertex_normals[i].norm() - 1.0) < 1e-14);
            CHECK(m.vertex_normals[i].dot(m.vertices[i] - s.center) > 0.0);
        }
    }
}

TEST_CASE("triangulate_sphere rejects degenerate resolutions")
{
    const SphereSpec s{Point3::Zero(), 1.0};
    CHECK_THROWS_AS(triangulate_sphere(s, 2, 8), GeometryError);
    CHECK_THROWS_AS(triangulate_sphere(s, 8, 2), GeometryError);
    CHECK_THROWS_AS(triangulate_sphere({Point3::Zero(), 0.0}, 8, 8), GeometryError);
}

TEST_CASE("area increases monotonically toward 4 pi r^2 under refinement")
{
    const double exact = 4.0 * kPi;
    double prev = 0.0;
    for (int level = 0; level < 3; ++level) {
        const int scale = 1 << level;
        const double a = surface_area(triangulate_sphere({Point3::Zero(), 1.0}, 8 * scale, 29 * scale));
        CHECK(a > prev);
        CHECK(a < exact);
        prev = a;
    }
    CHECK(prev / exact > 0.998);
}

TEST_CASE("meshes and point sets are deterministic")
{
    const SphereSpec s{Point3(0.1, 0.2, 0.3), 0.07};
    const TriMesh a = triangulate_sphere(s, 8, 29);
    const TriMesh b = triangulate_sphere(s, 8, 29);
    REQUIRE(a.vertex_count() == b.vertex_count());
    for (std::size_t i = 0; i < a.vertex_count(); ++i)
        CHECK((a.vertices[i].array() == b.vertices[i].array()).all());
    CHECK(a.triangles == b.triangles);
    const auto p = collocation_points(s, 500);
    const auto q = collocation_points(s, 500);
    for (std::size_t i = 0; i < p.size(); ++i)
        CHECK((p[i].array() == q[i].array()).all());
}

TEST_CASE("source pair embeds the fictitious sphere")
{
    const SourcePair sp = make_source_pair(Point3(0.4, 0.5, 0.0), 0.05);
    CHECK(sp.fictitious.center == sp.physical.center);
    CHECK(sp.fictitious.radius == doctest::Approx(0.04));
    CHECK(sp.mesh.vertex_count() == 234);
    CHECK(sp.physical_mesh.vertex_count() == 234);
    CHECK_THROWS_AS(make_source_pair(Point3::Zero(), 0.05, 1.0), GeometryError);
    CHECK_THROWS_AS(make_source_pair(Point3::Zero(), 0.05, 0.0), GeometryError);
}

TEST_CASE("collocation points: 1250 on radius 0.1")
{
    const SphereSpec s{Point3(-0.5, 0.6, 0.0), 0.1};
    const auto pts = collocation_points(s, 1250);
    CHECK(pts.size() == 1250);
    for (const auto& p : pts)
        CHECK(std::abs((p - s.center).norm() - 0.1) <= 1e-12 * 0.1);
}

TEST_CASE("collocation points below minimum")
{
    CHECK_THROWS_AS(collocation_points({Point3::Zero(), 1.0}, 2), GeometryError);
    CHECK_THROWS_AS(collocation_points({Point3::Zero(), 1.0}, 3), GeometryError);
    CHECK(collocation_points({Point3::Zero(), 1.0}, 4).size() == 4);
}

TEST_CASE("collocation spacing is quasi-uniform at n = 3200")
{
    const auto pts = collocation_points({Point3::Zero(), 1.0}, 3200);
    const auto d = nearest_neighbor_spacing(pts);
    double mean = 0.0;
    for (double v : d)
        mean += v;
    mean /= static_cast<double>(d.size());
    double var = 0.0;
    for (double v : d)
        var += (v - mean) * (v - mean);
    const double cv = std::sqrt(var / static_cast<double>(d.size())) / mean;
    MESSAGE("nearest-neighbour spacing CV = " << cv);
    CHECK(cv < 0.25);
}

TEST_CASE("evaluation points: consecutive midpoints")
{
    const SphereSpec s{Point3(0.5, -0.6, 0.0), 0.1};
    const auto col = collocation_points(s, 1250);
    const auto ev = evaluation_points(col, s);
    REQUIRE(ev.size() == 1249);
    double closest = std::numeric_limits<double>::infinity();
    for (const auto& e : ev) {
        CHECK(std::abs((e - s.center).norm() - s.radius) <= 1e-12 * s.radius);
        for (const auto& c : col)
            closest = std::min(closest, (e - c).norm());
    }
    CHECK(closest > 1e-6);
    // midpoint i lies on the great-circle arc between points i and i+1
    for (std::size_t i = 0; i < ev.size(); i += 97) {
        const double da = (ev[i] - col[i]).norm();
        const double db = (ev[i] - col[i + 1]).norm();
        CHECK(da == doctest::Approx(db).epsilon(1e-9));
    }
}

TEST_CASE("evaluation points: antipodal pair is rejected")
{
    const SphereSpec s{Point3::Zero(), 1.0};
    const std::vector<Point3> pair{Point3(0, 0, 1), Point3(0, 0, -1)};
    CHECK_THROWS_AS(evaluation_points(pair, s), GeometryError);
    const std::vector<Point3> one{Point3(0, 0, 1)};
    CHECK_THROWS_AS(evaluation_points(one, s), GeometryError);
}

TEST_CASE("phone layout: 12 centers on the 7 x 15 cm perimeter")
{
    const auto c = phone_array_layout(0.07, 0.15, 12);
    REQUIRE(c.size() == 12);
    Point3 sum = Point3::Zero();
    for (const auto& p : c) {
        sum += p;
        CHECK(p.z() == 0.0);
        const bool on_x_side = std::abs(std::abs(p.x()) - 0.035) < 1e-15 && std::abs(p.y()) <= 0.075 + 1e-15;
        const bool on_y_side = std::abs(std::abs(p.y()) - 0.075) < 1e-15 && std::abs(p.x()) <= 0.035 + 1e-15;
        CHECK((on_x_side || on_y_side));
    }
    CHECK((sum / 12.0).norm() < 1e-15);

    double closest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = i + 1; j < c.size(); ++j)
            closest = std::min(closest, (c[i] - c[j]).norm());
    CHECK(closest >= 2.0 * 0.01);
}

TEST_CASE("phone layout: 4 on a square are the side midpoints")
{
    const auto c = phone_array_layout(1.0, 1.0, 4);
    REQUIRE(c.size() == 4);
    for (const auto& p : c) {
        CHECK(p.norm() == doctest::Approx(0.5));
        // rotating by 90 degrees about z maps the set onto itself
        const Point3 r(-p.y(), p.x(), 0.0);
        const bool found = std::any_of(c.begin(), c.end(), [&](const Point3& q) { return (q - r).norm() < 1e-15; });
        CHECK(found);
    }
}

TEST_CASE("phone layout: corner variant and invalid counts")
{
    const auto c = phone_array_layout(0.07, 0.15, 12, PerimeterStart::corner);
    CHECK(c.front().isApprox(Point3(-0.035, -0.075, 0.0)));
    CHECK_THROWS_AS(phone_array_layout(0.07, 0.15, 7), GeometryError);
    CHECK_THROWS_AS(phone_array_layout(0.07, 0.15, 2), GeometryError);
    CHECK_THROWS_AS(phone_array_layout(0.0, 0.15, 12), GeometryError);
}

TEST_CASE("min_separation arithmetic")
{
    const std::vector<SourcePair> s{make_source_pair(Point3::Zero(), 0.05),
                                    make_source_pair(Point3(0.2, 0.0, 0.0), 0.05)};
    CHECK(min_separation(s, {}) == doctest::Approx(0.1).epsilon(1e-15));

    const std::vector<ControlRegion> r{
        make_control_region("w", {Point3(0.0, 0.5, 0.0), 0.1}, RegionRole::target, 16)};
    CHECK(min_separation(s, r) == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("min_separation rejects overlap and containment")
{
    const std::vector<SourcePair> same{make_source_pair(Point3::Zero(), 0.05),
                                       make_source_pair(Point3::Zero(), 0.03)};
    CHECK_THROWS_AS(min_separation(same, {}), GeometryError);
    const std::vector<SourcePair> nested{make_source_pair(Point3::Zero(), 0.05),
                                        make_source_pair(Point3(0.01, 0.0, 0.0), 0.01)};
    CHECK_THROWS_AS(min_separation(nested, {}), GeometryError);

    const std::vector<SourcePair> one{make_source_pair(Point3::Zero(), 0.05)};
    const std::vector<ControlRegion> around{
        make_control_region("null", {Point3::Zero(), 0.06}, RegionRole::null, 16)};
    // a source inside a null sphere is legitimate; inside its surface shell is not
    CHECK(min_separation(one, around) == doctest::Approx(0.01));
    const std::vector<ControlRegion> cutting{
        make_control_region("bad", {Point3(0.1, 0.0, 0.0), 0.07}, RegionRole::target, 16)};
    CHECK_THROWS_AS(min_separation(one, cutting), GeometryError);
    const std::vector<ControlRegion> inside{
        make_control_region("in", {Point3(0.01, 0.0, 0.0), 0.02}, RegionRole::target, 16)};
    CHECK_THROWS_AS(min_separation(one, inside), GeometryError);
}

TEST_CASE("sphere_gap handles containment")
{
    CHECK(sphere_gap({Point3::Zero(), 1.0}, {Point3(3, 0, 0), 1.0}) == doctest::Approx(1.0));
    CHECK(sphere_gap({Point3::Zero(), 1.0}, {Point3(0.1, 0, 0), 0.5}) == doctest::Approx(0.4));
    CHECK(sphere_gap({Point3::Zero(), 1.0}, {Point3(0.8, 0, 0), 0.5}) < 0.0);
}
