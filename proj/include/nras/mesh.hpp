#pragma once

/** @file
    @brief Structured triangulations of the unit square and the P1 finite-element space on them.
*/

#include "nras/common.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace nras {

using Point2 = std::array<double, 2>;
using Triangle = std::array<Index, 3>;

/// Boundary parts of the unit square, in tie-break order.
enum class Side : std::uint8_t { left = 0, right = 1, bottom = 2, top = 3 };

/**
   @brief Per-node boundary classification.

   Stores the set of sides a node lies on as a bitmask. Corner nodes lie on two
   sides; owner() resolves them to the side that comes first in Side order.
*/
struct BoundaryTag {
    std::uint8_t sides = 0;

    static constexpr std::uint8_t bit(Side s) { return std::uint8_t(1u << unsigned(s)); }

    bool interior() const { return sides == 0; }
    bool on(Side s) const { return (sides & bit(s)) != 0; }
    bool is_corner() const { return sides != 0 && (sides & (sides - 1)) != 0; }

    /// Owning side; only meaningful for boundary nodes.
    Side owner() const
    {
        for (auto s : {Side::left, Side::right, Side::bottom, Side::top})
            if (on(s)) return s;
        throw InvalidArgument("BoundaryTag::owner called on an interior node");
    }

    friend bool operator==(const BoundaryTag&, const BoundaryTag&) = default;
};

struct Mesh {
    Index cells_per_side = 0;
    std::vector<Point2> nodes;
    std::vector<Triangle> triangles;
    std::vector<BoundaryTag> boundary_tag;

    Index num_nodes() const { return Index(nodes.size()); }
    Index num_triangles() const { return Index(triangles.size()); }
    double mesh_width() const { return 1.0 / double(cells_per_side); }

    /// Lexicographic node numbering: row-major in (row = y, column = x).
    Index node_at(Index row, Index col) const { return row * (cells_per_side + 1) + col; }
};

inline double signed_area(const Mesh& mesh, const Triangle& t)
{
    const auto& a = mesh.nodes[t[0]];
    const auto& b = mesh.nodes[t[1]];
    const auto& c = mesh.nodes[t[2]];
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

inline std::vector<BoundaryTag> classify_boundary(const Mesh& mesh)
{
    std::vector<BoundaryTag> tags(mesh.nodes.size());
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        const auto [x, y] = mesh.nodes[i];
        auto& tag = tags[i];
        if (x == 0.0) tag.sides |= BoundaryTag::bit(Side::left);
        if (x == 1.0) tag.sides |= BoundaryTag::bit(Side::right);
        if (y == 0.0) tag.sides |= BoundaryTag::bit(Side::bottom);
        if (y == 1.0) tag.sides |= BoundaryTag::bit(Side::top);
    }
    return tags;
}

/**
   @brief Uniform n x n grid of squares on (0,1)^2, each cut bottom-left to top-right.

   Coordinates are computed as col/n and row/n so that boundary nodes carry
   exact 0 and 1 and nested grids share bit-identical coordinates.
*/
inline Mesh build_structured_mesh(Index n)
{
    if (n < 1) throw InvalidArgument("build_structured_mesh: cells per side must be >= 1");
    Mesh mesh;
    mesh.cells_per_side = n;
    mesh.nodes.reserve(std::size_t((n + 1) * (n + 1)));
    for (Index row = 0; row <= n; ++row)
        for (Index col = 0; col <= n; ++col)
            mesh.nodes.push_back({double(col) / double(n), double(row) / double(n)});

    mesh.triangles.reserve(std::size_t(2 * n * n));
    for (Index row = 0; row < n; ++row) {
        for (Index col = 0; col < n; ++col) {
            const Index sw = mesh.node_at(row, col);
            const Index se = mesh.node_at(row, col + 1);
            const Index nw = mesh.node_at(row + 1, col);
            const Index ne = mesh.node_at(row + 1, col + 1);
            mesh.triangles.push_back({sw, se, ne});
            mesh.triangles.push_back({sw, ne, nw});
        }
    }
    mesh.boundary_tag = classify_boundary(mesh);
    return mesh;
}

/// Node adjacency through shared triangle edges, optionally restricted to a node subset.
struct Graph {
    std::vector<std::vector<Index>> neighbors;

    Index size() const { return Index(neighbors.size()); }
};

// -----------------------------------------------------------------------------
// Quadrature

struct QuadraturePoint {
    Point2 point;
    double weight;
    std::array<double, 3> barycentric;
};

/// Polynomial degree integrated exactly by element_quadrature.
inline constexpr int quadrature_degree = 2;

/// Three-point edge-midpoint rule on a triangle.
inline std::array<QuadraturePoint, 3> element_quadrature(const std::array<Point2, 3>& v)
{
    const double area =
        0.5 * std::abs((v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]));
    auto midpoint = [&](int a, int b) {
        return Point2{0.5 * (v[a][0] + v[b][0]), 0.5 * (v[a][1] + v[b][1])};
    };
    return {{
        {midpoint(0, 1), area / 3.0, {0.5, 0.5, 0.0}},
        {midpoint(1, 2), area / 3.0, {0.0, 0.5, 0.5}},
        {midpoint(0, 2), area / 3.0, {0.5, 0.0, 0.5}},
    }};
}

inline std::array<Point2, 3> triangle_vertices(const Mesh& mesh, const Triangle& t)
{
    return {mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]};
}

/// Area and constant basis-function gradients of one P1 element.
struct ElementGeometry {
    double area = 0.0;
    std::array<Point2, 3> grad{};
};

inline ElementGeometry element_geometry(const Mesh& mesh, const Triangle& t)
{
    const auto& a = mesh.nodes[t[0]];
    const auto& b = mesh.nodes[t[1]];
    const auto& c = mesh.nodes[t[2]];
    const double det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    ElementGeometry geo;
    geo.area = 0.5 * std::abs(det);
    geo.grad[0] = {(b[1] - c[1]) / det, (c[0] - b[0]) / det};
    geo.grad[1] = {(c[1] - a[1]) / det, (a[0] - c[0]) / det};
    geo.grad[2] = {(a[1] - b[1]) / det, (b[0] - a[0]) / det};
    return geo;
}

/// Integral of a scalar field over the mesh with the element rule.
inline double integrate(const Mesh& mesh, const std::function<double(const Point2&)>& f)
{
    double sum = 0.0;
    for (const auto& t : mesh.triangles)
        for (const auto& q : element_quadrature(triangle_vertices(mesh, t))) sum += q.weight * f(q.point);
    return sum;
}

// -----------------------------------------------------------------------------
// FE space

/**
   @brief P1 space on a mesh with every boundary node carrying Dirichlet data.

   The optimization unknowns are the free (interior) nodes; free_nodes[k] is the
   mesh node of unknown k and node_to_free is its inverse (-1 on Dirichlet nodes).
*/
class FeSpace {
public:
    using BoundaryData = std::function<double(const Point2&, BoundaryTag)>;

    FeSpace(Mesh mesh, const BoundaryData& data) : mesh_(std::move(mesh))
    {
        const Index n = mesh_.num_nodes();
        node_to_free_.assign(std::size_t(n), -1);
        dirichlet_values_ = Vector::Zero(n);
        for (Index i = 0; i < n; ++i) {
            const auto tag = mesh_.boundary_tag[std::size_t(i)];
            if (tag.interior()) {
                node_to_free_[std::size_t(i)] = Index(free_nodes_.size());
                free_nodes_.push_back(i);
            } else {
                dirichlet_values_[i] = data(mesh_.nodes[std::size_t(i)], tag);
            }
        }
        geometry_.reserve(mesh_.triangles.size());
        for (const auto& t : mesh_.triangles) geometry_.push_back(element_geometry(mesh_, t));
    }

    const Mesh& mesh() const { return mesh_; }
    Index num_free() const { return Index(free_nodes_.size()); }
    std::span<const Index> free_nodes() const { return free_nodes_; }
    std::span<const Index> node_to_free() const { return node_to_free_; }
    bool is_dirichlet(Index node) const { return node_to_free_[std::size_t(node)] < 0; }
    const Vector& dirichlet_values() const { return dirichlet_values_; }
    const ElementGeometry& geometry(Index e) const { return geometry_[std::size_t(e)]; }

    /// Nodal vector holding x on free nodes and the Dirichlet data elsewhere.
    Vector expand(const Vector& x) const
    {
        require(x.size() == num_free(), "FeSpace::expand: dimension mismatch");
        Vector u = dirichlet_values_;
        for (Index k = 0; k < num_free(); ++k) u[free_nodes_[std::size_t(k)]] = x[k];
        return u;
    }

    Vector restrict_to_free(const Vector& u) const
    {
        require(u.size() == mesh_.num_nodes(), "FeSpace::restrict_to_free: dimension mismatch");
        Vector x(num_free());
        for (Index k = 0; k < num_free(); ++k) x[k] = u[free_nodes_[std::size_t(k)]];
        return x;
    }

    /// Adjacency graph over free nodes, indexed by free-node number.
    Graph free_graph() const
    {
        Graph g;
        g.neighbors.resize(free_nodes_.size());
        for (const auto& t : mesh_.triangles) {
            for (int a = 0; a < 3; ++a) {
                const Index fa = node_to_free_[std::size_t(t[a])];
                if (fa < 0) continue;
                for (int b = 0; b < 3; ++b) {
                    const Index fb = node_to_free_[std::size_t(t[b])];
                    if (a == b || fb < 0) continue;
                    g.neighbors[std::size_t(fa)].push_back(fb);
                }
            }
        }
        for (auto& nb : g.neighbors) {
            std::sort(nb.begin(), nb.end());
            nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
        }
        return g;
    }

private:
    Mesh mesh_;
    std::vector<Index> free_nodes_;
    std::vector<Index> node_to_free_;
    Vector dirichlet_values_;
    std::vector<ElementGeometry> geometry_;
};

} // namespace nras
