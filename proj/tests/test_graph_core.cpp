#include <catch_amalgamated.hpp>

#include "cusplab/graph.hpp"
#include "cusplab/operators.hpp"
#include "cusplab/spectral.hpp"

using namespace cusplab;
using Catch::Approx;

TEST_CASE("cusp ray weights") {
    WeightedGraph g = build_cusp_ray(20);
    REQUIRE(g.vertex_count == 20);
    for (int n = 0; n < 20; ++n) REQUIRE(g.m(n) == std::exp(-double(n)));
    for (int n = 0; n + 1 < 20; ++n)
        REQUIRE(g.edge(n, n + 1) == std::exp(-(2.0 * n + 1.0) / 2.0));
    REQUIRE(g.edge(0, 2) == 0.0);
}

TEST_CASE("funnel ray weights") {
    WeightedGraph g = build_funnel_ray(20);
    for (int n = 0; n < 20; ++n) REQUIRE(g.m(n) == std::exp(double(n)));
    for (int n = 0; n + 1 < 20; ++n)
        REQUIRE(g.edge(n, n + 1) == std::exp((2.0 * n + 1.0) / 2.0));
}

TEST_CASE("exponential ray length cap") {
    REQUIRE_THROWS_AS(build_cusp_ray(701), InvalidArgument);
    REQUIRE_THROWS_AS(build_funnel_ray(701), InvalidArgument);
    REQUIRE_NOTHROW(build_cusp_ray(700));
}

TEST_CASE("interior ray degree is e^{1/2} + e^{-1/2}") {
    const double expected = 2.2552519304127614;
    for (auto* builder : {&build_cusp_ray, &build_funnel_ray}) {
        WeightedGraph g = (*builder)(30);
        RealVector deg = g.degree();
        for (int n = 1; n + 1 < 30; ++n) REQUIRE(deg(n) == Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("twisted product degree rule") {
    FiniteGraphSpec fiber = FiniteGraphSpec::cycle(3);
    WeightedGraph ray = build_cusp_ray(15);
    WeightedGraph g = twisted_product(ray, fiber);
    REQUIRE(g.vertex_count == 45);
    RealVector deg = g.degree();
    RealVector ray_deg = ray.degree();
    const double fiber_deg = 2.0;  // triangle, unit edges, m2 = 1
    for (int n = 0; n < 15; ++n)
        for (int k = 0; k < 3; ++k) {
            double expected = ray_deg(n) / fiber.m2 + fiber_deg / ray.m(n);
            REQUIRE(std::abs(deg(n * 3 + k) - expected) <= 1e-12 * expected);
        }
}

TEST_CASE("cartesian product differs from twisted in the ray part") {
    FiniteGraphSpec fiber = FiniteGraphSpec::cycle(3);
    WeightedGraph ray = build_cusp_ray(10);
    WeightedGraph tw = twisted_product(ray, fiber);
    WeightedGraph ca = cartesian_product(ray, fiber);
    REQUIRE(tw.vertex_count == ca.vertex_count);
    REQUIRE(tw.m.isApprox(ca.m));
}

TEST_CASE("cusp product has finite volume") {
    FiniteGraphSpec fiber = FiniteGraphSpec::cycle(3, 2.0);
    WeightedGraph g = twisted_product(build_cusp_ray(100), fiber);
    double bound = fiber.m2 * fiber.p * std::exp(1.0) / (std::exp(1.0) - 1.0);
    REQUIRE(g.total_measure() < bound);
}

TEST_CASE("triangle fiber Laplacian spectrum is {0, 3, 3}") {
    WeightedGraph tri;
    tri.vertex_count = 3;
    tri.m = RealVector::Ones(3);
    std::vector<Eigen::Triplet<double>> trips;
    detail::add_sym(trips, 0, 1, 1.0);
    detail::add_sym(trips, 1, 2, 1.0);
    detail::add_sym(trips, 0, 2, 1.0);
    tri.edges = detail::build_sparse(3, trips);
    EigenDecomposition eig = eigendecompose(assemble_laplacian(tri));
    REQUIRE(eig.eigenvalues(0) == Approx(0.0).margin(1e-14));
    REQUIRE(eig.eigenvalues(1) == Approx(3.0).epsilon(1e-13));
    REQUIRE(eig.eigenvalues(2) == Approx(3.0).epsilon(1e-13));
}

TEST_CASE("z model shape") {
    GeometrySpec spec;
    spec.kind = GeometryKind::z_model;
    spec.ray_length = 8;
    spec.fiber = FiniteGraphSpec::cycle(3);
    WeightedGraph g = build_geometry(spec);
    REQUIRE(g.vertex_count == (2 * 8 + 1) * 3);
    // measure peaks at the signed origin
    double peak = g.m.maxCoeff();
    REQUIRE(peak == Approx(std::exp(8.0)));
    g.validate();
}

TEST_CASE("glued model with no compact part and no gluing is block diagonal") {
    GeometrySpec spec;
    spec.kind = GeometryKind::glued;
    spec.ray_length = 10;
    spec.fiber = FiniteGraphSpec::cycle(3);
    WeightedGraph g = build_glued_model(spec);
    DenseMatrix h = assemble_laplacian(g).dense();
    DenseMatrix hf = assemble_laplacian(twisted_product(build_funnel_ray(10), spec.fiber)).dense();
    DenseMatrix hc = assemble_laplacian(twisted_product(build_cusp_ray(10), spec.fiber)).dense();
    const int nf = int(hf.rows());
    REQUIRE((h.topLeftCorner(nf, nf) - hf).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((h.bottomRightCorner(nf, nf) - hc).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(h.topRightCorner(nf, nf).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gluing through a compact vertex only touches the junction") {
    GeometrySpec block = {GeometryKind::glued, 10, FiniteGraphSpec::cycle(3),
                          ProductKind::twisted, {}, {}};
    GeometrySpec spec = block;
    spec.compact_part.m = {1.0};
    spec.gluing.push_back({{Block::funnel, 0, 0}, {Block::compact, 0, 0}, 1.0});
    spec.gluing.push_back({{Block::cusp, 0, 0}, {Block::compact, 0, 0}, 1.0});
    WeightedGraph g = build_glued_model(spec);
    WeightedGraph gb = build_glued_model(block);
    DenseMatrix h = assemble_laplacian(g).dense();
    // rows/columns of the block model, re-embedded around the compact vertex
    const int nf = 30, nc = 30;
    DenseMatrix hb = DenseMatrix::Zero(61, 61);
    DenseMatrix blockm = assemble_laplacian(gb).dense();
    hb.topLeftCorner(nf, nf) = blockm.topLeftCorner(nf, nf);
    hb.bottomRightCorner(nc, nc) = blockm.bottomRightCorner(nc, nc);
    DenseMatrix resid = h - hb;
    // junction set: compact vertex, funnel level 0, cusp level 0
    auto junction = [&](int i) {
        if (i == nf) return true;  // compact vertex
        const VertexLabel& l = g.labels[i];
        return l.block != Block::compact && l.level == 0;
    };
    for (int i = 0; i < 61; ++i)
        for (int j = 0; j < 61; ++j)
            if (!junction(i) && !junction(j)) REQUIRE(resid(i, j) == Complex(0.0, 0.0));
}

TEST_CASE("graph validation rejects bad inputs") {
    WeightedGraph g = build_cusp_ray(5);
    REQUIRE_NOTHROW(g.validate());
    g.m(2) = 0.0;
    REQUIRE_THROWS_AS(g.validate(), InvalidArgument);
    FiniteGraphSpec bad;
    bad.p = 2;
    bad.edges.emplace_back(0, 0, 1.0);
    REQUIRE_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("gluing edges must touch level-0 ray vertices") {
    GeometrySpec spec;
    spec.kind = GeometryKind::glued;
    spec.ray_length = 5;
    GluingEdge e;
    e.a = {Block::funnel, 3, 0};
    e.b = {Block::cusp, 0, 0};
    spec.gluing.push_back(e);
    REQUIRE_THROWS_AS(build_glued_model(spec), InvalidArgument);
}

TEST_CASE("component count sees disconnected glued pieces") {
    GeometrySpec spec;
    spec.kind = GeometryKind::glued;
    spec.ray_length = 6;
    WeightedGraph g = build_glued_model(spec);  // no gluing: two components
    REQUIRE(g.component_count() == 2);
    spec.gluing.push_back({{Block::funnel, 0, 0}, {Block::cusp, 0, 0}, 1.0});
    REQUIRE(build_glued_model(spec).component_count() == 1);
}
