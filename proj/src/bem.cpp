#include "fieldctl/bem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fieldctl/error.hpp"
#include "fieldctl/parallel.hpp"
#include "fieldctl/simd.hpp"

namespace fieldctl {

const Quad7Rule& quad7_rule()
{
    static const Quad7Rule rule = [] {
        const double s15 = std::sqrt(15.0);
        const double a1 = (6.0 - s15) / 21.0;
        const double b1 = (9.0 + 2.0 * s15) / 21.0;
        const double a2 = (6.0 + s15) / 21.0;
        const double b2 = (9.0 - 2.0 * s15) / 21.0;
        const double w1 = (155.0 - s15) / 1200.0;
        const double w2 = (155.0 + s15) / 1200.0;
        Quad7Rule r{};
        r.bary = {{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
                   {a1, a1, b1},
                   {a1, b1, a1},
                   {b1, a1, a1},
                   {a2, a2, b2},
                   {a2, b2, a2},
                   {b2, a2, a2}}};
        r.weight = {9.0 / 40.0, w1, w1, w1, w2, w2, w2};
        return r;
    }();
    return rule;
}

namespace {

using Corners = std::array<std::array<double, 3>, 3>;

constexpr Corners kParentCorners{{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};

std::array<double, 3> mid(const std::array<double, 3>& a, const std::array<double, 3>& b)
{
    return {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])};
}

std::array<Corners, 4> split(const Corners& c)
{
    const auto m01 = mid(c[0], c[1]);
    const auto m12 = mid(c[1], c[2]);
    const auto m20 = mid(c[2], c[0]);
    return {{{c[0], m01, m20}, {m01, c[1], m12}, {m20, m12, c[2]}, {m01, m12, m20}}};
}

Point3 at(const std::array<double, 3>& l, const Point3& a, const Point3& b, const Point3& c)
{
    return l[0] * a + l[1] * b + l[2] * c;
}

struct Node {
    Point3 y;
    double w;
    std::array<double, 3> lambda;
};

// Seven nodes of the sub-triangle `corners` of the flat parent (a, b, c),
// projected radially onto the sphere with the projection's area factor.
std::array<Node, 7> sphere_nodes(const SphereSpec& sphere, const Point3& a, const Point3& b, const Point3& c,
                                 const Corners& corners)
{
    const Vec3 normal = (b - a).cross(c - a).normalized();
    const double sub_area = triangle_area(at(corners[0], a, b, c), at(corners[1], a, b, c), at(corners[2], a, b, c));
    const double r2 = sphere.radius * sphere.radius;
    const auto& rule = quad7_rule();
    std::array<Node, 7> nodes;
    for (int q = 0; q < 7; ++q) {
        std::array<double, 3> l{};
        for (int m = 0; m < 3; ++m)
            for (int j = 0; j < 3; ++j)
                l[j] += rule.bary[q][m] * corners[m][j];
        const Vec3 d = at(l, a, b, c) - sphere.center;
        const double dn = d.norm();
        nodes[q].y = sphere.center + (sphere.radius / dn) * d;
        nodes[q].w = rule.weight[q] * sub_area * r2 * d.dot(normal) / (dn * dn * dn);
        nodes[q].lambda = l;
    }
    return nodes;
}

void collect_leaves(const Corners& c, int depth, std::vector<Corners>& out)
{
    if (depth == 0) {
        out.push_back(c);
        return;
    }
    for (const auto& child : split(c))
        collect_leaves(child, depth - 1, out);
}

struct Scratch {
    std::vector<double> re, im;
    void resize(std::size_t n)
    {
        if (re.size() < n) {
            re.resize(n);
            im.resize(n);
        }
    }
};

Scratch& scratch()
{
    thread_local Scratch s;
    return s;
}

}  // namespace

SingleLayer::SingleLayer(std::span<const SourcePair> sources, QuadratureOptions opts)
    : opts_(opts)
{
    if (opts_.base_depth < 0 || opts_.max_depth < opts_.base_depth || !(opts_.near_ratio > 0.0))
        throw ConfigError("invalid quadrature options");

    std::vector<Corners> leaves;
    collect_leaves(kParentCorners, opts_.base_depth, leaves);
    nodes_per_triangle_ = static_cast<int>(7 * leaves.size());

    std::size_t offset = 0;
    blocks_.reserve(sources.size());
    for (std::size_t s = 0; s < sources.size(); ++s) {
        const auto& src = sources[s];
        Block b;
        b.sphere = src.fictitious;
        b.vertices = src.mesh.vertices;
        b.triangles = src.mesh.triangles;
        b.dof_offset = offset;
        b.vertex_count = src.mesh.vertex_count();
        const std::size_t nt = b.triangles.size();
        const std::size_t nn = nt * nodes_per_triangle_;
        b.x.reserve(nn);
        b.y.reserve(nn);
        b.z.reserve(nn);
        b.w.reserve(nn);
        b.lambda.reserve(nn);
        for (const auto& t : b.triangles) {
            const Point3& pa = b.vertices[t[0]];
            const Point3& pb = b.vertices[t[1]];
            const Point3& pc = b.vertices[t[2]];
            if (!(triangle_area(pa, pb, pc) > 0.0))
                throw GeometryError("degenerate triangle on fictitious mesh of source " + std::to_string(s));
            b.centroids.push_back((pa + pb + pc) / 3.0);
            b.diameters.push_back(triangle_diameter(pa, pb, pc));
            b.max_diameter = std::max(b.max_diameter, b.diameters.back());
            for (const auto& leaf : leaves) {
                for (const auto& node : sphere_nodes(b.sphere, pa, pb, pc, leaf)) {
                    b.x.push_back(node.y.x());
                    b.y.push_back(node.y.y());
                    b.z.push_back(node.y.z());
                    b.w.push_back(node.w);
                    b.lambda.push_back(node.lambda);
                }
            }
        }
        for (std::size_t v = 0; v < b.vertex_count; ++v)
            dofs_.push_back({static_cast<int>(s), static_cast<int>(v)});
        offset += b.vertex_count;
        blocks_.push_back(std::move(b));
    }
}

double SingleLayer::reliability_radius(std::size_t source) const
{
    return opts_.near_ratio * blocks_[source].max_diameter / std::ldexp(1.0, opts_.max_depth);
}

void SingleLayer::check_point(const Point3& x) const
{
    if (!x.allFinite())
        throw GeometryError("evaluation point is not finite");
    for (std::size_t s = 0; s < blocks_.size(); ++s) {
        const auto& b = blocks_[s];
        const double gap = std::abs((x - b.sphere.center).norm() - b.sphere.radius);
        if (gap < reliability_radius(s))
            throw GeometryError("evaluation point within the quadrature reliability radius of fictitious source " +
                                std::to_string(s) + " (gap " + std::to_string(gap) + " m)");
    }
}

template <class Sink>
void SingleLayer::integrate_refined(const Block& b, int tri, const Corners& corners, int depth, const Point3& x,
                                    const Vec3* n, double k, Kind kind, Sink& sink) const
{
    const auto& t = b.triangles[tri];
    const Point3& pa = b.vertices[t[0]];
    const Point3& pb = b.vertices[t[1]];
    const Point3& pc = b.vertices[t[2]];
    const Point3 c0 = at(corners[0], pa, pb, pc);
    const Point3 c1 = at(corners[1], pa, pb, pc);
    const Point3 c2 = at(corners[2], pa, pb, pc);
    const double diam = triangle_diameter(c0, c1, c2);
    const bool near = (x - (c0 + c1 + c2) / 3.0).norm() < opts_.near_ratio * diam;
    if (depth < opts_.base_depth || (near && depth < opts_.max_depth)) {
        for (const auto& child : split(corners))
            integrate_refined(b, tri, child, depth + 1, x, n, k, kind, sink);
        return;
    }

    const auto nodes = sphere_nodes(b.sphere, pa, pb, pc, corners);
    double nx[7], ny[7], nz[7], nw[7], re[7], im[7];
    for (int q = 0; q < 7; ++q) {
        nx[q] = nodes[q].y.x();
        ny[q] = nodes[q].y.y();
        nz[q] = nodes[q].y.z();
        nw[q] = nodes[q].w;
    }
    const simd::NodeView view{nx, ny, nz, nw, 7};
    const double p[3] = {x.x(), x.y(), x.z()};
    const auto& kern = simd::kernels();
    if (kind == Kind::value) {
        kern.single_layer(p, k, view, re, im);
    } else {
        const double nn[3] = {n->x(), n->y(), n->z()};
        kern.normal_derivative(p, nn, k, view, re, im);
    }
    for (int a = 0; a < 3; ++a) {
        cplx acc{};
        for (int q = 0; q < 7; ++q)
            acc += nodes[q].lambda[a] * cplx(re[q], im[q]);
        sink(b.dof_offset + t[a], acc);
    }
}

template <class Sink>
void SingleLayer::integrate(const Point3& x, const Vec3* n, double k, Kind kind, Sink&& sink) const
{
    check_point(x);
    const auto& kern = simd::kernels();
    const double p[3] = {x.x(), x.y(), x.z()};
    const double nn[3] = {n ? n->x() : 0.0, n ? n->y() : 0.0, n ? n->z() : 0.0};
    auto& buf = scratch();

    for (const auto& b : blocks_) {
        const std::size_t nt = b.triangles.size();
        const std::size_t nodes = b.x.size();
        buf.resize(nodes);
        const simd::NodeView view{b.x.data(), b.y.data(), b.z.data(), b.w.data(), nodes};
        if (kind == Kind::value)
            kern.single_layer(p, k, view, buf.re.data(), buf.im.data());
        else
            kern.normal_derivative(p, nn, k, view, buf.re.data(), buf.im.data());

        const double center_dist = (x - b.sphere.center).norm();
        const bool all_far = center_dist - b.sphere.radius > opts_.near_ratio * b.max_diameter;

        for (std::size_t t = 0; t < nt; ++t) {
            if (!all_far && (x - b.centroids[t]).norm() < opts_.near_ratio * b.diameters[t]) {
                integrate_refined(b, static_cast<int>(t), kParentCorners, 0, x, n, k, kind, sink);
                continue;
            }
            const std::size_t first = t * nodes_per_triangle_;
            cplx acc[3] = {};
            for (int q = 0; q < nodes_per_triangle_; ++q) {
                const cplx g(buf.re[first + q], buf.im[first + q]);
                const auto& l = b.lambda[first + q];
                acc[0] += l[0] * g;
                acc[1] += l[1] * g;
                acc[2] += l[2] * g;
            }
            const auto& tri = b.triangles[t];
            for (int a = 0; a < 3; ++a)
                sink(b.dof_offset + tri[a], acc[a]);
        }
    }
}

void SingleLayer::row(const Point3& x, double k, std::span<cplx> out) const
{
    if (out.size() != dof_count())
        throw Error("row buffer has wrong length");
    std::fill(out.begin(), out.end(), cplx{});
    integrate(x, nullptr, k, Kind::value, [&](std::size_t dof, cplx v) { out[dof] += v; });
}

void SingleLayer::normal_derivative_row(const Point3& x, const Vec3& n, double k, std::span<cplx> out) const
{
    if (out.size() != dof_count())
        throw Error("row buffer has wrong length");
    std::fill(out.begin(), out.end(), cplx{});
    integrate(x, &n, k, Kind::normal_derivative, [&](std::size_t dof, cplx v) { out[dof] += v; });
}

cplx SingleLayer::evaluate(const Point3& x, double k, const DensityVector& density) const
{
    if (static_cast<std::size_t>(density.size()) != dof_count())
        throw Error("density length " + std::to_string(density.size()) + " does not match " +
                    std::to_string(dof_count()) + " degrees of freedom");
    cplx sum{};
    integrate(x, nullptr, k, Kind::value, [&](std::size_t dof, cplx v) { sum += v * density[dof]; });
    return sum;
}

cplx SingleLayer::normal_derivative(const Point3& x, const Vec3& n, double k, const DensityVector& density) const
{
    if (static_cast<std::size_t>(density.size()) != dof_count())
        throw Error("density length does not match degrees of freedom");
    cplx sum{};
    integrate(x, &n, k, Kind::normal_derivative, [&](std::size_t dof, cplx v) { sum += v * density[dof]; });
    return sum;
}

std::vector<Point3> SingleLayer::quadrature_nodes() const
{
    std::vector<Point3> out;
    for (const auto& b : blocks_)
        for (std::size_t i = 0; i < b.x.size(); ++i)
            out.emplace_back(b.x[i], b.y[i], b.z[i]);
    return out;
}

PropagationMatrix assemble_matrix(std::span<const SourcePair> sources, std::span<const ControlRegion> regions,
                                  const WaveContext& ctx, QuadratureOptions opts)
{
    min_separation(sources, regions);
    const SingleLayer op(sources, opts);

    PropagationMatrix A;
    for (std::size_t r = 0; r < regions.size(); ++r) {
        for (const auto& p : regions[r].collocation) {
            A.row_points.push_back(p);
            A.row_region.push_back(static_cast<int>(r));
        }
    }
    A.col_dofs = op.dofs();
    for (const auto& p : A.row_points)
        op.check_point(p);

    const auto m = static_cast<Eigen::Index>(A.row_points.size());
    const auto n = static_cast<Eigen::Index>(op.dof_count());
    A.entries.resize(m, n);
    parallel_for(static_cast<std::size_t>(m), [&](std::size_t begin, std::size_t end) {
        std::vector<cplx> buf(op.dof_count());
        for (std::size_t r = begin; r < end; ++r) {
            op.row(A.row_points[r], ctx.k(), buf);
            A.entries.row(static_cast<Eigen::Index>(r)) = Eigen::Map<const Eigen::RowVectorXcd>(buf.data(), n);
        }
    });
    if (!A.entries.allFinite())
        throw NumericalError("propagation matrix has non-finite entries");
    return A;
}

std::vector<cplx> radiate(const DensityVector& density, std::span<const SourcePair> sources, const WaveContext& ctx,
                          std::span<const Point3> points, QuadratureOptions opts)
{
    const SingleLayer op(sources, opts);
    if (static_cast<std::size_t>(density.size()) != op.dof_count())
        throw Error("density length does not match the source meshes");
    for (const auto& p : points)
        op.check_point(p);
    std::vector<cplx> out(points.size());
    parallel_for(points.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            out[i] = op.evaluate(points[i], ctx.k(), density);
    });
    return out;
}

namespace {

void check_embedding(const SourcePair& source)
{
    if (!(source.fictitious.radius < source.physical.radius) ||
        (source.fictitious.center - source.physical.center).norm() + source.fictitious.radius >= source.physical.radius)
        throw GeometryError("fictitious source is not compactly embedded in the physical source");
}

}  // namespace

std::vector<cplx> normal_velocity(const DensityVector& density, const SourcePair& source, const WaveContext& ctx,
                                  QuadratureOptions opts)
{
    check_embedding(source);
    const SingleLayer op(std::span<const SourcePair>(&source, 1), opts);
    const auto& m = ctx.medium();
    const cplx prefactor = cplx(0.0, -1.0) / (m.rho * m.c * ctx.k());
    const auto& verts = source.physical_mesh.vertices;
    const auto& normals = source.physical_mesh.vertex_normals;
    std::vector<cplx> out(verts.size());
    for (std::size_t i = 0; i < verts.size(); ++i)
        out[i] = prefactor * op.normal_derivative(verts[i], normals[i], ctx.k(), density);
    return out;
}

std::vector<cplx> surface_pressure(const DensityVector& density, const SourcePair& source, const WaveContext& ctx,
                                   QuadratureOptions opts)
{
    check_embedding(source);
    return radiate(density, std::span<const SourcePair>(&source, 1), ctx, source.physical_mesh.vertices, opts);
}

}  // namespace fieldctl
