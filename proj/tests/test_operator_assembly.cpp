#include <catch_amalgamated.hpp>

#include "cusplab/graph.hpp"
#include "cusplab/operators.hpp"
#include "cusplab/perturbation.hpp"
#include "cusplab/spectral.hpp"

using namespace cusplab;
using Catch::Approx;

namespace {
const double kAlpha = 0.2552519304127614;
}

TEST_CASE("assembled Laplacians are weighted Hermitian and positive") {
    std::vector<WeightedGraph> graphs;
    graphs.push_back(build_cusp_ray(25));
    graphs.push_back(build_funnel_ray(25));
    graphs.push_back(twisted_product(build_cusp_ray(20), FiniteGraphSpec::cycle(3)));
    GeometrySpec glued;
    glued.kind = GeometryKind::glued;
    glued.ray_length = 15;
    glued.gluing.push_back({{Block::funnel, 0, 0}, {Block::cusp, 0, 0}, 1.0});
    graphs.push_back(build_glued_model(glued));
    for (const auto& g : graphs) {
        OperatorMatrix h = assemble_laplacian(g);
        REQUIRE(h.weighted_hermiticity_defect() <= 1e-12);
        EigenDecomposition eig = eigendecompose(h);
        double scale = std::max(1.0, eig.eigenvalues.maxCoeff());
        REQUIRE(eig.eigenvalues.minCoeff() >= -1e-10 * scale);
    }
}

TEST_CASE("half-line Laplacian equals 2 - U - U* - 1_0 entrywise") {
    const int n1 = 30;
    OperatorMatrix h = assemble_halfline_laplacian(n1);
    ShiftOperators s = shift_operators(n1);
    DenseMatrix expected = 2.0 * DenseMatrix::Identity(n1, n1) - s.U.dense() - s.Ustar.dense();
    expected(0, 0) -= 1.0;
    expected(n1 - 1, n1 - 1) -= 1.0;  // truncation end loses its outward edge
    REQUIRE((h.dense() - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("shift algebra: [Q, U] = U and U*U = 1 - 1_0 exactly") {
    ShiftOperators s = shift_operators(20);
    DenseMatrix u = s.U.dense(), us = s.Ustar.dense(), q = s.Q.dense();
    REQUIRE(((q * u - u * q) - u).cwiseAbs().maxCoeff() == 0.0);
    DenseMatrix uu = us * u;  // annihilates delta_{N1-1} on the truncation
    for (int n = 0; n + 1 < 20; ++n) REQUIRE(uu(n, n) == Complex(1.0, 0.0));
}

TEST_CASE("twisted product rule holds exactly") {
    FiniteGraphSpec fiber = FiniteGraphSpec::cycle(3, 2.0);
    WeightedGraph ray = build_cusp_ray(12);
    WeightedGraph g = twisted_product(ray, fiber);
    DenseMatrix h = assemble_laplacian(g).dense();
    DenseMatrix h1 = assemble_laplacian(ray).dense();
    // fiber Laplacian
    WeightedGraph fib;
    fib.vertex_count = 3;
    fib.m = RealVector::Constant(3, fiber.m2);
    std::vector<Eigen::Triplet<double>> trips;
    for (const auto& [a, b, w] : fiber.edges) detail::add_sym(trips, a, b, w);
    fib.edges = detail::build_sparse(3, trips);
    DenseMatrix h2 = assemble_laplacian(fib).dense();
    const int p = 3;
    for (int n = 0; n < 12; ++n)
        for (int k = 0; k < p; ++k)
            for (int n2 = 0; n2 < 12; ++n2)
                for (int k2 = 0; k2 < p; ++k2) {
                    Complex expected = 0.0;
                    if (k == k2) expected += h1(n, n2) / fiber.m2;
                    if (n == n2) expected += h2(k, k2) / ray.m(n);
                    REQUIRE(h(n * p + k, n2 * p + k2) == expected);
                }
}

TEST_CASE("funnel gauge display holds on the interior") {
    const int n1 = 40;
    WeightedGraph g = build_funnel_ray(n1);
    DenseMatrix h = assemble_laplacian(g).dense();
    RealVector t = g.m.cwiseSqrt();  // T_{m->1} = sqrt(m)
    DenseMatrix reduced = conjugate_by_diagonal(t, h);
    DenseMatrix model = assemble_halfline_laplacian(n1).dense() +
                        kAlpha * DenseMatrix::Identity(n1, n1);
    model(0, 0) += 1.0 - std::exp(-0.5);
    // interior: away from the truncation end only; the display is exact at 0
    REQUIRE((reduced - model).topLeftCorner(n1 - 1, n1 - 1).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("cusp gauge display holds on the interior") {
    const int n1 = 40;
    WeightedGraph g = build_cusp_ray(n1);
    DenseMatrix h = assemble_laplacian(g).dense();
    RealVector t = g.m.cwiseSqrt();
    DenseMatrix reduced = conjugate_by_diagonal(t, h);
    DenseMatrix model = assemble_halfline_laplacian(n1).dense() +
                        kAlpha * DenseMatrix::Identity(n1, n1);
    model(0, 0) -= std::exp(0.5) - 1.0;
    REQUIRE((reduced - model).topLeftCorner(n1 - 1, n1 - 1).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("gauge transform is a weighted isometry") {
    WeightedGraph g = build_funnel_ray(25);
    RealVector unit = RealVector::Ones(25);
    GaugePair gp = gauge_transform(g.m, unit, g.edges);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 5; ++trial) {
        ComplexVector f(25);
        for (int i = 0; i < 25; ++i) f(i) = Complex(gauss(rng), gauss(rng));
        ComplexVector tf = gp.t_diagonal.cast<Complex>().asDiagonal() * f;
        double before = (g.m.cast<Complex>().asDiagonal() * f).dot(f).real();
        double after = tf.squaredNorm();
        REQUIRE(after == Approx(before).epsilon(1e-13));
    }
}

TEST_CASE("zero perturbation reproduces the free Laplacian") {
    WeightedGraph g = twisted_product(build_cusp_ray(15), FiniteGraphSpec::cycle(3));
    OperatorMatrix free = assemble_laplacian(g);
    OperatorMatrix pert = assemble_perturbed_laplacian(g, PerturbationSpec::zero());
    REQUIRE((free.dense() - pert.dense()).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(free.weights.isApprox(pert.weights));
}

TEST_CASE("gauge difference matches direct conjugation") {
    WeightedGraph g = twisted_product(build_cusp_ray(20), FiniteGraphSpec::cycle(3));
    PerturbationSpec pert;
    pert.mu = make_power_decay(PerturbationKind::mu, 0.5, 1.0);
    pert.eps = make_power_decay_edge(0.3, 1.0);
    OperatorMatrix hp = assemble_perturbed_laplacian(g, pert);
    RealVector t(g.vertex_count);
    for (int x = 0; x < g.vertex_count; ++x)
        t(x) = std::sqrt(1.0 + pert.mu_at(g.labels[x]));  // T_{m_mu -> m}
    DenseMatrix direct = conjugate_by_diagonal(t, hp.dense()) - assemble_laplacian(g).dense();
    DenseMatrix formula = gauge_difference(g, pert).dense();
    REQUIRE((direct - formula).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("normalized ray reductions are isospectral with the weighted builds") {
    const int n1 = 40;
    for (Block side : {Block::funnel, Block::cusp}) {
        WeightedGraph g = side == Block::funnel ? build_funnel_ray(n1) : build_cusp_ray(n1);
        EigenDecomposition a = eigendecompose(assemble_laplacian(g));
        EigenDecomposition b = eigendecompose(normalized_ray_reduction(n1, side).h);
        REQUIRE((a.eigenvalues - b.eigenvalues).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("normalized glued ray matches the weighted glued model") {
    const int n1 = 30;
    GeometrySpec spec;
    spec.kind = GeometryKind::glued;
    spec.ray_length = n1;
    spec.gluing.push_back({{Block::funnel, 0, 0}, {Block::cusp, 0, 0}, 1.0});
    EigenDecomposition a = eigendecompose(assemble_laplacian(build_glued_model(spec)));
    EigenDecomposition b = eigendecompose(normalized_glued_ray(n1, 1.0).h);
    REQUIRE((a.eigenvalues - b.eigenvalues).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("perturbed normalized reduction matches the weighted perturbed build") {
    const int n1 = 35;
    PerturbationSpec pert;
    pert.mu = make_power_decay(PerturbationKind::mu, 0.5, 1.0);
    pert.eps = make_power_decay_edge(0.3, 1.0);
    pert.V = make_power_decay(PerturbationKind::V, 0.3, 1.0);
    for (Block side : {Block::funnel, Block::cusp}) {
        WeightedGraph g = side == Block::funnel ? build_funnel_ray(n1) : build_cusp_ray(n1);
        OperatorMatrix h = assemble_perturbed_laplacian(g, pert);
        DenseMatrix hd = h.dense();
        for (int n = 0; n < n1; ++n) hd(n, n) += pert.v_at(g.labels[n]);
        EigenDecomposition a = eigendecompose(OperatorMatrix::from_dense(hd, h.weights, true));
        EigenDecomposition b =
            eigendecompose(normalized_ray_reduction_perturbed(n1, side, pert).h);
        REQUIRE((a.eigenvalues - b.eigenvalues).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("multiplication operator is diagonal and Hermitian") {
    RealVector v(4), m(4);
    v << 1.0, -2.0, 0.0, 3.0;
    m << 1.0, 2.0, 3.0, 4.0;
    OperatorMatrix op = multiplication_operator(v, m);
    REQUIRE(op.weighted_hermiticity_defect() <= 1e-15);
    REQUIRE(op.dense()(1, 1) == Complex(-2.0, 0.0));
    REQUIRE(op.dense()(0, 1) == Complex(0.0, 0.0));
}
