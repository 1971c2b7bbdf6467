#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fieldctl/error.hpp"
#include "fieldctl/geometry.hpp"
#include "fieldctl/kernel.hpp"

namespace fieldctl {

using DensityVector = Eigen::VectorXcd;

/// Symmetric seven-point rule on the reference triangle, exact for total
/// degree 5. Weights sum to one; multiply by the triangle area.
struct Quad7Rule {
    std::array<std::array<double, 3>, 7> bary;
    std::array<double, 7> weight;
};

const Quad7Rule& quad7_rule();

/// Integrates f over the flat triangle (a, b, c). f is called with the
/// physical point and its barycentric coordinates.
template <class F>
auto quad7(F&& f, const Point3& a, const Point3& b, const Point3& c)
{
    const double area = triangle_area(a, b, c);
    if (!(area > 0.0))
        throw GeometryError("quad7 on a degenerate triangle");
    const auto& rule = quad7_rule();
    using R = decltype(f(a, rule.bary[0]));
    R sum{};
    for (int q = 0; q < 7; ++q) {
        const auto& l = rule.bary[q];
        const Point3 y = l[0] * a + l[1] * b + l[2] * c;
        sum += rule.weight[q] * f(y, l);
    }
    return area * sum;
}

struct QuadratureOptions {
    /// Uniform subdivision levels applied to every triangle. One level (four
    /// seven-point panels per triangle) keeps entries stable to ~1e-7 under a
    /// further split; the bare rule moves them by ~1e-5 on 234-vertex meshes.
    int base_depth = 1;
    /// A (sub)triangle whose centroid is closer than near_ratio times its
    /// diameter to the evaluation point is split 4-way.
    double near_ratio = 2.0;
    /// Deepest adaptive split. Points that would need more are rejected.
    int max_depth = 8;
};

/// Column layout entry: source index and vertex index on its fictitious mesh.
struct DofRef {
    int source;
    int vertex;
};

/// Single-layer potential of per-vertex hat densities on the fictitious
/// spheres. Quadrature nodes are mapped radially onto the exact sphere; the
/// hat function is the barycentric coordinate of the flat parent triangle.
class SingleLayer {
public:
    explicit SingleLayer(std::span<const SourcePair> sources, QuadratureOptions opts = {});

    std::size_t dof_count() const { return dofs_.size(); }
    std::size_t source_count() const { return blocks_.size(); }
    std::size_t dof_offset(std::size_t source) const { return blocks_[source].dof_offset; }
    std::size_t dof_count(std::size_t source) const { return blocks_[source].vertex_count; }
    const std::vector<DofRef>& dofs() const { return dofs_; }

    /// Distance to a fictitious surface below which evaluation is refused.
    double reliability_radius(std::size_t source) const;

    /// Throws GeometryError if x is too close to any fictitious surface.
    void check_point(const Point3& x) const;

    /// out[i] = integral of N_i(y) phi(x, y) over its support, for every dof.
    void row(const Point3& x, double k, std::span<cplx> out) const;

    /// Same, with n . grad_x phi(x, y) as the kernel.
    void normal_derivative_row(const Point3& x, const Vec3& n, double k, std::span<cplx> out) const;

    cplx evaluate(const Point3& x, double k, const DensityVector& density) const;
    cplx normal_derivative(const Point3& x, const Vec3& n, double k, const DensityVector& density) const;

    /// Positions of the far-field quadrature nodes of every source.
    std::vector<Point3> quadrature_nodes() const;

private:
    struct Block {
        SphereSpec sphere;
        std::vector<Point3> vertices;
        std::vector<std::array<int, 3>> triangles;
        std::vector<Point3> centroids;
        std::vector<double> diameters;
        double max_diameter = 0.0;
        std::size_t dof_offset = 0;
        std::size_t vertex_count = 0;
        // far-field node cloud, nodes_per_triangle consecutive nodes per triangle
        std::vector<double> x, y, z, w;
        std::vector<std::array<double, 3>> lambda;
    };

    enum class Kind { value, normal_derivative };

    template <class Sink>
    void integrate(const Point3& x, const Vec3* n, double k, Kind kind, Sink&& sink) const;

    template <class Sink>
    void integrate_refined(const Block& b, int tri, const std::array<std::array<double, 3>, 3>& corners,
                           int depth, const Point3& x, const Vec3* n, double k, Kind kind, Sink& sink) const;

    std::vector<Block> blocks_;
    std::vector<DofRef> dofs_;
    QuadratureOptions opts_;
    int nodes_per_triangle_ = 7;
};

struct PropagationMatrix {
    Eigen::MatrixXcd entries;
    std::vector<Point3> row_points;
    std::vector<int> row_region;  // index into the region list, per row
    std::vector<DofRef> col_dofs;

    Eigen::Index rows() const { return entries.rows(); }
    Eigen::Index cols() const { return entries.cols(); }
};

/// Collocation matrix: rows are the collocation points of every region in
/// order, columns every vertex of every fictitious mesh in source order.
PropagationMatrix assemble_matrix(std::span<const SourcePair> sources, std::span<const ControlRegion> regions,
                                  const WaveContext& ctx, QuadratureOptions opts = {});

std::vector<cplx> radiate(const DensityVector& density, std::span<const SourcePair> sources,
                          const WaveContext& ctx, std::span<const Point3> points, QuadratureOptions opts = {});

/// Normal velocity on the physical surface of one source, at its physical
/// mesh vertices. `density` holds that source's vertex coefficients.
std::vector<cplx> normal_velocity(const DensityVector& density, const SourcePair& source, const WaveContext& ctx,
                                  QuadratureOptions opts = {});

/// Pressure on the physical surface of one source, at its physical mesh
/// vertices.
std::vector<cplx> surface_pressure(const DensityVector& density, const SourcePair& source, const WaveContext& ctx,
                                   QuadratureOptions opts = {});

}  // namespace fieldctl
