#include <catch_amalgamated.hpp>

#include "cusplab/graph.hpp"
#include "cusplab/operators.hpp"
#include "cusplab/perturbation.hpp"

using namespace cusplab;
using Catch::Approx;

namespace {
WeightedGraph cusp_product(int n1 = 60) {
    return twisted_product(build_cusp_ray(n1), FiniteGraphSpec::cycle(3));
}

PerturbationSpec radial_triple(double exponent = 1.0) {
    PerturbationSpec pert;
    pert.mu = make_power_decay(PerturbationKind::mu, 0.5, exponent);
    pert.eps = make_power_decay_edge(0.3, exponent);
    pert.V = make_power_decay(PerturbationKind::V, 0.3, exponent);
    pert.declared_mu_decay = exponent;
    pert.declared_edge_decay = exponent;
    pert.declared_v_decay = exponent;
    return pert;
}
}  // namespace

TEST_CASE("power decay factory values and guards") {
    auto mu = make_power_decay(PerturbationKind::mu, 0.5, 1.0);
    VertexLabel l0{Block::cusp, 0, 0}, l3{Block::cusp, 3, 0};
    REQUIRE(mu(l0) == Approx(0.5).epsilon(1e-15));
    REQUIRE(mu(l3) == Approx(0.5 / bracket(3.0)).epsilon(1e-15));
    REQUIRE_THROWS_AS(make_power_decay(PerturbationKind::mu, -1.0, 1.0), InvalidArgument);
    REQUIRE_NOTHROW(make_power_decay(PerturbationKind::V, -2.0, 1.0));  // V may be negative
}

TEST_CASE("H0 accepts vanishing fields and rejects constants") {
    WeightedGraph g = cusp_product();
    REQUIRE(check_H0(radial_triple(), g).pass);
    PerturbationSpec constant;
    constant.mu = make_constant(0.5);
    REQUIRE_FALSE(check_H0(constant, g).pass);
}

TEST_CASE("H1-H3 weighted difference bounds at the declared exponent") {
    WeightedGraph g = cusp_product(80);
    REQUIRE(check_H123(radial_triple(), g, 0.5).pass);
}

TEST_CASE("slowly alternating perturbations fail the difference bounds") {
    WeightedGraph g = cusp_product(80);
    PerturbationSpec pert;
    pert.mu = make_alternating(0.3, 0.1);
    pert.declared_mu_decay = 0.1;
    // differences of (-1)^n / <n>^0.1 do not decay at exponent 1/2
    REQUIRE_FALSE(check_H123(pert, g, 0.5).pass);
}

TEST_CASE("radiality detection on the cusp") {
    WeightedGraph g = cusp_product(30);
    REQUIRE(is_radial(radial_triple(), g));
    PerturbationSpec skew;
    skew.V = [](const VertexLabel& l) { return l.fiber == 0 ? 1.0 : 0.0; };
    REQUIRE_FALSE(is_radial(skew, g));
    REQUIRE_THROWS_AS(require_radial_on_cusp(skew, g), InvalidArgument);
    REQUIRE_NOTHROW(require_radial_on_cusp(radial_triple(), g));
}

TEST_CASE("fiber average is the radial part") {
    WeightedGraph g = cusp_product(20);
    PerturbationSpec skew;
    skew.V = [](const VertexLabel& l) { return double(l.fiber); };
    PerturbationSpec avg = fiber_average(skew, g);
    for (int n = 0; n < 20; ++n)
        REQUIRE(avg.v_at(g.labels[3 * n]) == Approx(1.0).epsilon(1e-14));  // mean of {0,1,2}
}

TEST_CASE("perturbed Laplacian stays weighted Hermitian and positive") {
    WeightedGraph g = cusp_product(40);
    PerturbationSpec pert = radial_triple();
    OperatorMatrix h = assemble_perturbed_laplacian(g, pert);
    REQUIRE(h.weighted_hermiticity_defect() <= 1e-12);
}

TEST_CASE("perturbation guards reject mu or eps at -1 or below") {
    WeightedGraph g = cusp_product(10);
    PerturbationSpec bad;
    bad.mu = make_constant(-1.5);
    REQUIRE_THROWS_AS(assemble_perturbed_laplacian(g, bad), InvalidArgument);
}

TEST_CASE("triple factory declares a consistent bundle") {
    PerturbationSpec pert = make_power_decay_triple(0.5, 0.3, 0.3, 1.0, 0.5);
    REQUIRE(pert.declared_eps_exponent == 0.5);
    WeightedGraph g = cusp_product(60);
    REQUIRE(check_H0(pert, g).pass);
    REQUIRE(check_H123(pert, g, 0.5).pass);
}
