#pragma once

// Weighted graphs: exponentially weighted rays, finite fibers, Cartesian and
// twisted products, and glued cusp/funnel models.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <utility>

#include "cusplab/types.hpp"

namespace cusplab {

/// Finite fiber graph: p vertices, weighted edge list, constant vertex
/// measure m2.
struct FiniteGraphSpec {
    int p = 1;
    std::vector<std::tuple<int, int, double>> edges;  // (i, j, weight), i != j
    double m2 = 1.0;

    void validate() const {
        require(p >= 1, "fiber: vertex count must be positive");
        require(m2 > 0.0, "fiber: m2 must be positive");
        for (const auto& [i, j, w] : edges) {
            require(i >= 0 && i < p && j >= 0 && j < p, "fiber: edge endpoint out of range");
            require(i != j, "fiber: no self loops");
            require(w > 0.0, "fiber: edge weight must be positive");
        }
    }

    static FiniteGraphSpec single_vertex(double m2 = 1.0) { return {1, {}, m2}; }

    static FiniteGraphSpec cycle(int p, double m2 = 1.0, double w = 1.0) {
        FiniteGraphSpec g{p, {}, m2};
        for (int i = 0; i < p; ++i) g.edges.emplace_back(i, (i + 1) % p, w);
        if (p == 2) g.edges.resize(1);
        return g;
    }

    static FiniteGraphSpec path(int p, double m2 = 1.0, double w = 1.0) {
        FiniteGraphSpec g{p, {}, m2};
        for (int i = 0; i + 1 < p; ++i) g.edges.emplace_back(i, i + 1, w);
        return g;
    }

    static FiniteGraphSpec edgeless(int p, double m2 = 1.0) { return {p, {}, m2}; }
};

/// One endpoint of a gluing edge: a level-0 ray vertex on a side, or a
/// compact-part vertex.
struct GluingEndpoint {
    Block block = Block::compact;
    int level = 0;   // ray sides only; must be 0
    int index = 0;   // fiber index (ray sides) or compact vertex index
};

struct GluingEdge {
    GluingEndpoint a, b;
    double weight = 1.0;
};

/// Compact part of a glued model: arbitrary finite weighted graph.
struct CompactPartSpec {
    std::vector<double> m;  // vertex measures; size = vertex count
    std::vector<std::tuple<int, int, double>> edges;
};

enum class GeometryKind { half_ray_cusp, half_ray_funnel, z_model, glued };
enum class ProductKind { cartesian, twisted };

/// Declarative description of the graph to build.
struct GeometrySpec {
    GeometryKind kind = GeometryKind::half_ray_cusp;
    int ray_length = 2;  // N1, levels per ray (per side for z_model)
    FiniteGraphSpec fiber = FiniteGraphSpec::single_vertex();
    ProductKind product = ProductKind::twisted;
    CompactPartSpec compact_part;   // glued only
    std::vector<GluingEdge> gluing; // glued only
};

/// The triple (E, V, m) with optional product labels.
struct WeightedGraph {
    int vertex_count = 0;
    RealVector m;                       // positive vertex measure
    SparseRealMatrix edges;             // symmetric, zero diagonal
    std::vector<VertexLabel> labels;    // empty unless a product/glued build
    int levels = 0;                     // N1 for product graphs (z_model: 2*N1+1)
    int fiber_size = 1;

    double edge(int x, int y) const { return edges.coeff(x, y); }

    double total_measure() const { return m.sum(); }

    /// deg(x) = (1/m(x)) sum_y E(x,y).
    RealVector degree() const {
        RealVector row_sums = RealVector::Zero(vertex_count);
        for (int k = 0; k < edges.outerSize(); ++k)
            for (SparseRealMatrix::InnerIterator it(edges, k); it; ++it)
                row_sums(it.row()) += it.value();
        return row_sums.cwiseQuotient(m);
    }

    void validate() const {
        require(vertex_count >= 1, "graph: empty vertex set");
        require(m.size() == vertex_count, "graph: measure size mismatch");
        for (int i = 0; i < vertex_count; ++i)
            require(m(i) > 0.0, "graph: vertex measure must be positive");
        SparseRealMatrix diff = SparseRealMatrix(edges.transpose()) - edges;
        require(diff.coeffs().size() == 0 || diff.coeffs().cwiseAbs().maxCoeff() == 0.0,
                "graph: edge weights must be exactly symmetric");
        for (int i = 0; i < vertex_count; ++i)
            require(edges.coeff(i, i) == 0.0, "graph: no self loops");
    }

    /// Number of connected components (edges with positive weight).
    int component_count() const {
        std::vector<int> comp(vertex_count, -1);
        int n_comp = 0;
        std::vector<int> stack;
        for (int s = 0; s < vertex_count; ++s) {
            if (comp[s] >= 0) continue;
            stack.push_back(s);
            comp[s] = n_comp;
            while (!stack.empty()) {
                int x = stack.back();
                stack.pop_back();
                for (SparseRealMatrix::InnerIterator it(edges, x); it; ++it) {
                    if (it.value() > 0.0 && comp[it.row()] < 0) {
                        comp[it.row()] = n_comp;
                        stack.push_back(it.row());
                    }
                }
            }
            ++n_comp;
        }
        return n_comp;
    }
};

namespace detail {

inline SparseRealMatrix build_sparse(int n, std::vector<Eigen::Triplet<double>>& trips) {
    SparseRealMatrix s(n, n);
    s.setFromTriplets(trips.begin(), trips.end());
    s.makeCompressed();
    return s;
}

inline void add_sym(std::vector<Eigen::Triplet<double>>& trips, int i, int j, double w) {
    trips.emplace_back(i, j, w);
    trips.emplace_back(j, i, w);
}

}  // namespace detail

// e^{|n|} leaves double range near |n| = 709.
inline constexpr int kMaxExpRayLength = 700;

/// Ray with m(n) = e^{-n}, E(n, n+1) = e^{-(2n+1)/2}: the cusp profile.
inline WeightedGraph build_cusp_ray(int n1) {
    require(n1 >= 2, "cusp ray: N1 >= 2 required");
    require(n1 <= kMaxExpRayLength, "cusp ray: N1 > 700 underflows double precision");
    WeightedGraph g;
    g.vertex_count = n1;
    g.levels = n1;
    g.m = RealVector(n1);
    std::vector<Eigen::Triplet<double>> trips;
    for (int n = 0; n < n1; ++n) g.m(n) = std::exp(-double(n));
    for (int n = 0; n + 1 < n1; ++n)
        detail::add_sym(trips, n, n + 1, std::exp(-(2.0 * n + 1.0) / 2.0));
    g.edges = detail::build_sparse(n1, trips);
    g.labels.resize(n1);
    for (int n = 0; n < n1; ++n) g.labels[n] = {Block::cusp, n, 0};
    return g;
}

/// Ray with m(n) = e^{n}, E(n, n+1) = e^{(2n+1)/2}: the funnel profile.
inline WeightedGraph build_funnel_ray(int n1) {
    require(n1 >= 2, "funnel ray: N1 >= 2 required");
    require(n1 <= kMaxExpRayLength, "funnel ray: N1 > 700 overflows double precision");
    WeightedGraph g;
    g.vertex_count = n1;
    g.levels = n1;
    g.m = RealVector(n1);
    std::vector<Eigen::Triplet<double>> trips;
    for (int n = 0; n < n1; ++n) g.m(n) = std::exp(double(n));
    for (int n = 0; n + 1 < n1; ++n)
        detail::add_sym(trips, n, n + 1, std::exp((2.0 * n + 1.0) / 2.0));
    g.edges = detail::build_sparse(n1, trips);
    g.labels.resize(n1);
    for (int n = 0; n < n1; ++n) g.labels[n] = {Block::funnel, n, 0};
    return g;
}

/// Unit-weight path on {0..N1-1} (the half line N).
inline WeightedGraph build_halfline(int n1) {
    require(n1 >= 2, "half line: N1 >= 2 required");
    WeightedGraph g;
    g.vertex_count = n1;
    g.levels = n1;
    g.m = RealVector::Ones(n1);
    std::vector<Eigen::Triplet<double>> trips;
    for (int n = 0; n + 1 < n1; ++n) detail::add_sym(trips, n, n + 1, 1.0);
    g.edges = detail::build_sparse(n1, trips);
    return g;
}

namespace detail {

// Product vertex (n, k) -> n*p + k.  block/level_offset let the glued build
// reuse this for both sides.
inline WeightedGraph product(const WeightedGraph& g1, const FiniteGraphSpec& g2,
                             ProductKind kind, Block block) {
    g2.validate();
    const int n1 = g1.vertex_count;
    const int p = g2.p;
    WeightedGraph g;
    g.vertex_count = n1 * p;
    g.levels = n1;
    g.fiber_size = p;
    g.m = RealVector(g.vertex_count);
    g.labels.resize(g.vertex_count);
    for (int n = 0; n < n1; ++n)
        for (int k = 0; k < p; ++k) {
            g.m(n * p + k) = g1.m(n) * g2.m2;
            int level = g1.labels.empty() ? n : g1.labels[n].level;
            g.labels[n * p + k] = {block, level, k};
        }
    std::vector<Eigen::Triplet<double>> trips;
    for (int x = 0; x < g1.edges.outerSize(); ++x)
        for (SparseRealMatrix::InnerIterator it(g1.edges, x); it; ++it) {
            if (it.row() <= x) continue;  // each undirected pair once
            double w = (kind == ProductKind::twisted) ? it.value() : it.value() * g2.m2;
            for (int k = 0; k < p; ++k)
                add_sym(trips, x * p + k, int(it.row()) * p + k, w);
        }
    for (const auto& [i, j, w2] : g2.edges)
        for (int n = 0; n < n1; ++n) {
            double w = (kind == ProductKind::twisted) ? w2 : g1.m(n) * w2;
            add_sym(trips, n * p + i, n * p + j, w);
        }
    g.edges = build_sparse(g.vertex_count, trips);
    return g;
}

}  // namespace detail

/// Twisted product: m = m1*m2, E((x,y),(x',y')) = E1 delta_{yy'} + delta_{xx'} E2.
inline WeightedGraph twisted_product(const WeightedGraph& g1, const FiniteGraphSpec& g2) {
    Block b = g1.labels.empty() ? Block::cusp : g1.labels[0].block;
    return detail::product(g1, g2, ProductKind::twisted, b);
}

/// Cartesian product: the edge weights carry the m2(y) / m1(x) factors.
inline WeightedGraph cartesian_product(const WeightedGraph& g1, const FiniteGraphSpec& g2) {
    Block b = g1.labels.empty() ? Block::cusp : g1.labels[0].block;
    return detail::product(g1, g2, ProductKind::cartesian, b);
}

/// Z-model: single ray over n in [-N1, N1] with m(n) = e^{-n}; n > 0 is the
/// cusp side, n < 0 the funnel side.  Crossed with the fiber.
inline WeightedGraph build_z_model(const GeometrySpec& spec) {
    const int n1 = spec.ray_length;
    require(n1 >= 1 && n1 <= kMaxExpRayLength, "z model: ray length out of range");
    const int total = 2 * n1 + 1;
    WeightedGraph ray;
    ray.vertex_count = total;
    ray.levels = total;
    ray.m = RealVector(total);
    ray.labels.resize(total);
    std::vector<Eigen::Triplet<double>> trips;
    for (int i = 0; i < total; ++i) {
        int n = i - n1;  // signed level
        ray.m(i) = std::exp(-double(n));
        ray.labels[i] = {n >= 0 ? Block::cusp : Block::funnel, n, 0};
    }
    for (int i = 0; i + 1 < total; ++i) {
        int n = i - n1;
        detail::add_sym(trips, i, i + 1, std::exp(-(2.0 * n + 1.0) / 2.0));
    }
    ray.edges = detail::build_sparse(total, trips);
    return detail::product(ray, spec.fiber, spec.product, Block::cusp);
}

/// Glued model: funnel block, compact block, cusp block, plus gluing edges.
/// Gluing edges may only touch level-0 ray vertices and compact vertices.
inline WeightedGraph build_glued_model(const GeometrySpec& spec) {
    require(spec.kind == GeometryKind::glued, "glued build requires kind = glued");
    const int n1 = spec.ray_length;
    const int p = spec.fiber.p;
    WeightedGraph funnel = detail::product(build_funnel_ray(n1), spec.fiber,
                                           spec.product, Block::funnel);
    WeightedGraph cusp = detail::product(build_cusp_ray(n1), spec.fiber,
                                         spec.product, Block::cusp);
    const int n_compact = int(spec.compact_part.m.size());
    const int n_funnel = funnel.vertex_count;
    const int n_cusp = cusp.vertex_count;
    const int total = n_funnel + n_compact + n_cusp;
    const int compact_off = n_funnel;
    const int cusp_off = n_funnel + n_compact;

    WeightedGraph g;
    g.vertex_count = total;
    g.levels = n1;
    g.fiber_size = p;
    g.m = RealVector(total);
    g.labels.resize(total);
    g.m.segment(0, n_funnel) = funnel.m;
    for (int i = 0; i < n_funnel; ++i) g.labels[i] = funnel.labels[i];
    for (int i = 0; i < n_compact; ++i) {
        require(spec.compact_part.m[i] > 0.0, "glued: compact measure must be positive");
        g.m(compact_off + i) = spec.compact_part.m[i];
        g.labels[compact_off + i] = {Block::compact, -1, i};
    }
    g.m.segment(cusp_off, n_cusp) = cusp.m;
    for (int i = 0; i < n_cusp; ++i) g.labels[cusp_off + i] = cusp.labels[i];

    std::vector<Eigen::Triplet<double>> trips;
    auto copy_block = [&](const SparseRealMatrix& e, int off) {
        for (int x = 0; x < e.outerSize(); ++x)
            for (SparseRealMatrix::InnerIterator it(e, x); it; ++it)
                trips.emplace_back(off + int(it.row()), off + x, it.value());
    };
    copy_block(funnel.edges, 0);
    copy_block(cusp.edges, cusp_off);
    for (const auto& [i, j, w] : spec.compact_part.edges) {
        require(i >= 0 && i < n_compact && j >= 0 && j < n_compact && i != j && w > 0.0,
                "glued: bad compact edge");
        detail::add_sym(trips, compact_off + i, compact_off + j, w);
    }
    auto resolve = [&](const GluingEndpoint& e) -> int {
        if (e.block == Block::compact) {
            require(e.index >= 0 && e.index < n_compact, "glued: compact endpoint out of range");
            return compact_off + e.index;
        }
        require(e.level == 0,
                "glued: gluing edges must touch only level-0 ray vertices");
        require(e.index >= 0 && e.index < p, "glued: fiber index out of range");
        return (e.block == Block::funnel ? 0 : cusp_off) + e.index;
    };
    for (const auto& edge : spec.gluing) {
        int a = resolve(edge.a), b = resolve(edge.b);
        require(a != b, "glued: gluing edge endpoints coincide");
        require(edge.weight > 0.0, "glued: gluing weight must be positive");
        detail::add_sym(trips, a, b, edge.weight);
    }
    g.edges = detail::build_sparse(total, trips);
    return g;
}

/// Dispatch on the spec kind.
inline WeightedGraph build_geometry(const GeometrySpec& spec) {
    switch (spec.kind) {
        case GeometryKind::half_ray_cusp:
            return detail::product(build_cusp_ray(spec.ray_length), spec.fiber,
                                   spec.product, Block::cusp);
        case GeometryKind::half_ray_funnel:
            return detail::product(build_funnel_ray(spec.ray_length), spec.fiber,
                                   spec.product, Block::funnel);
        case GeometryKind::z_model:
            return build_z_model(spec);
        case GeometryKind::glued:
            return build_glued_model(spec);
    }
    throw InvalidArgument("unknown geometry kind");
}

}  // namespace cusplab
