#pragma once

// Conjugate operators for the Mourre theory: the half-line generator A_N,
// its gauge-conjugated funnel and cusp versions, the low-energy fiber
// projection, the glued direct sum, and the weight operators <Lambda>^{-s}.

#include <cmath>
#include <complex>
#include <functional>

#include "cusplab/graph.hpp"
#include "cusplab/operators.hpp"

namespace cusplab {

enum class SideTag { halfline, funnel, cusp, glued };

struct ConjugateBundle {
    OperatorMatrix A;
    SparseMatrix p_le;      // projection onto the low-energy fiber subspace
    bool has_projection = false;
    RealVector lambda;      // diagonal of Lambda: n + 1/2 per level, 0 on the compact part
    SideTag side = SideTag::halfline;
};

namespace detail {

// Tridiagonal kernel (i/2) lower (n-1/2) at (n, n-1), -(i/2) upper (n+1/2)
// at (n, n+1).  lower = upper = 1 gives A_N; the e^{+-1/2} factors give the
// ray parts of the funnel and cusp operators.
inline SparseMatrix conjugate_tridiagonal(int n1, double lower, double upper) {
    std::vector<Eigen::Triplet<Complex>> trips;
    const Complex half_i(0.0, 0.5);
    for (int n = 1; n < n1; ++n) {
        trips.emplace_back(n, n - 1, half_i * lower * (n - 0.5));
        trips.emplace_back(n - 1, n, -half_i * upper * (n - 0.5));
    }
    SparseMatrix a(n1, n1);
    a.setFromTriplets(trips.begin(), trips.end());
    return a;
}

}  // namespace detail

/// A_N = (SQ + QS)/2 with S = (U* - U)/2i; equals the expanded form
/// (i/2)(U(Q+1/2) - U*(Q-1/2)).  The sign is pinned so that the commutator
/// with the half-line Laplacian is positive on the band.
inline OperatorMatrix assemble_A_halfline(int n1) {
    require(n1 >= 3, "A halfline: N1 >= 3 required");
    OperatorMatrix a;
    a.dim = n1;
    a.weights = RealVector::Ones(n1);
    a.entries = detail::conjugate_tridiagonal(n1, 1.0, 1.0);
    a.hermitian = true;
    return a;
}

/// m2-weighted orthogonal projection onto ker(Delta_2): one indicator per
/// connected component of the fiber, assembled exactly (no eigensolver).
inline RealMatrix fiber_kernel_projection(const FiniteGraphSpec& fiber) {
    fiber.validate();
    const int p = fiber.p;
    // component labels by union-find over the edge list
    std::vector<int> comp(p);
    for (int k = 0; k < p; ++k) comp[k] = k;
    std::function<int(int)> find = [&](int k) {
        while (comp[k] != k) { comp[k] = comp[comp[k]]; k = comp[k]; }
        return k;
    };
    for (const auto& [i, j, w] : fiber.edges) {
        (void)w;
        comp[find(i)] = find(j);
    }
    std::vector<int> size(p, 0);
    for (int k = 0; k < p; ++k) ++size[find(k)];
    RealMatrix proj = RealMatrix::Zero(p, p);
    // constant m2 cancels between the indicator and its normalization
    for (int k = 0; k < p; ++k)
        for (int l = 0; l < p; ++l)
            if (find(k) == find(l)) proj(k, l) = 1.0 / double(size[find(k)]);
    return proj;
}

namespace detail {

inline SparseMatrix kron_with_fiber(const SparseMatrix& ray, const RealMatrix& fib) {
    const int n1 = int(ray.rows());
    const int p = int(fib.rows());
    std::vector<Eigen::Triplet<Complex>> trips;
    for (int n = 0; n < ray.outerSize(); ++n)
        for (SparseMatrix::InnerIterator it(ray, n); it; ++it)
            for (int k = 0; k < p; ++k)
                for (int l = 0; l < p; ++l)
                    if (fib(k, l) != 0.0)
                        trips.emplace_back(int(it.row()) * p + k, n * p + l,
                                           it.value() * fib(k, l));
    SparseMatrix out(n1 * p, n1 * p);
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

inline RealVector ray_lambda(int n1, int p) {
    RealVector lam(n1 * p);
    for (int n = 0; n < n1; ++n)
        for (int k = 0; k < p; ++k) lam(n * p + k) = n + 0.5;
    return lam;
}

}  // namespace detail

/// Funnel conjugate operator: T_{1->m1f} A_N T^{-1} tensor fiber identity.
/// Ray entries (i/2)e^{-1/2}(n-1/2) at (n,n-1) and -(i/2)e^{1/2}(n+1/2) at
/// (n,n+1); this is the combination Hermitian against m(n) = e^n.
inline ConjugateBundle assemble_A_funnel(int n1, const FiniteGraphSpec& fiber) {
    require(n1 >= 3, "A funnel: N1 >= 3 required");
    fiber.validate();
    const int p = fiber.p;
    ConjugateBundle b;
    b.side = SideTag::funnel;
    const double rhalf = std::exp(-0.5), half = std::exp(0.5);
    SparseMatrix ray = detail::conjugate_tridiagonal(n1, rhalf, half);
    b.A.dim = n1 * p;
    b.A.weights = RealVector(n1 * p);
    for (int n = 0; n < n1; ++n)
        for (int k = 0; k < p; ++k) b.A.weights(n * p + k) = std::exp(double(n)) * fiber.m2;
    b.A.entries = detail::kron_with_fiber(ray, RealMatrix::Identity(p, p));
    b.A.hermitian = true;
    b.lambda = detail::ray_lambda(n1, p);
    return b;
}

/// Cusp conjugate operator: (T^{-1}_{1->m1c} A_N T) tensor P_le, zero on the
/// high-energy fiber subspace.  Ray entries carry e^{+1/2} on the lower and
/// e^{-1/2} on the upper diagonal, Hermitian against m(n) = e^{-n}.
inline ConjugateBundle assemble_A_cusp(int n1, const FiniteGraphSpec& fiber) {
    require(n1 >= 3, "A cusp: N1 >= 3 required");
    fiber.validate();
    const int p = fiber.p;
    ConjugateBundle b;
    b.side = SideTag::cusp;
    const double half = std::exp(0.5), rhalf = std::exp(-0.5);
    SparseMatrix ray = detail::conjugate_tridiagonal(n1, half, rhalf);
    RealMatrix proj = fiber_kernel_projection(fiber);
    b.A.dim = n1 * p;
    b.A.weights = RealVector(n1 * p);
    for (int n = 0; n < n1; ++n)
        for (int k = 0; k < p; ++k) b.A.weights(n * p + k) = std::exp(-double(n)) * fiber.m2;
    b.A.entries = detail::kron_with_fiber(ray, proj);
    b.A.hermitian = true;
    b.lambda = detail::ray_lambda(n1, p);
    std::vector<Eigen::Triplet<Complex>> trips;
    for (int n = 0; n < n1; ++n)
        for (int k = 0; k < p; ++k)
            for (int l = 0; l < p; ++l)
                if (proj(k, l) != 0.0)
                    trips.emplace_back(n * p + k, n * p + l, Complex(proj(k, l), 0.0));
    b.p_le = SparseMatrix(n1 * p, n1 * p);
    b.p_le.setFromTriplets(trips.begin(), trips.end());
    b.has_projection = true;
    return b;
}

/// Glued conjugate operator A_f (+) 0 (+) A_c, zero block on the compact
/// part, matching the vertex ordering of build_glued_model.
inline ConjugateBundle assemble_A_glued(const GeometrySpec& spec) {
    require(spec.kind == GeometryKind::glued, "A glued: glued geometry required");
    ConjugateBundle funnel = assemble_A_funnel(spec.ray_length, spec.fiber);
    ConjugateBundle cusp = assemble_A_cusp(spec.ray_length, spec.fiber);
    const int nf = funnel.A.dim;
    const int nq = int(spec.compact_part.m.size());
    const int nc = cusp.A.dim;
    const int total = nf + nq + nc;
    ConjugateBundle b;
    b.side = SideTag::glued;
    b.A.dim = total;
    b.A.weights = RealVector(total);
    b.A.weights.segment(0, nf) = funnel.A.weights;
    for (int i = 0; i < nq; ++i) b.A.weights(nf + i) = spec.compact_part.m[i];
    b.A.weights.segment(nf + nq, nc) = cusp.A.weights;
    std::vector<Eigen::Triplet<Complex>> trips;
    auto splice = [&trips](const SparseMatrix& m, int off) {
        for (int x = 0; x < m.outerSize(); ++x)
            for (SparseMatrix::InnerIterator it(m, x); it; ++it)
                trips.emplace_back(off + int(it.row()), off + x, it.value());
    };
    splice(funnel.A.entries, 0);
    splice(cusp.A.entries, nf + nq);
    b.A.entries = SparseMatrix(total, total);
    b.A.entries.setFromTriplets(trips.begin(), trips.end());
    b.A.hermitian = true;
    b.lambda = RealVector::Zero(total);
    b.lambda.segment(0, nf) = funnel.lambda;
    b.lambda.segment(nf + nq, nc) = cusp.lambda;
    trips.clear();
    splice(cusp.p_le, nf + nq);
    b.p_le = SparseMatrix(total, total);
    b.p_le.setFromTriplets(trips.begin(), trips.end());
    b.has_projection = true;
    return b;
}

/// Diagonal <Lambda>^{-s} with Lambda = (Q + 1/2) tensor 1 on the rays and 0
/// on the compact part (so the weight there is <0>^{-s} = 1).
inline OperatorMatrix assemble_lambda_weight(const WeightedGraph& g, double s) {
    require(s >= 0.0, "lambda weight: s >= 0 required");
    require(!g.labels.empty(), "lambda weight: labeled graph required");
    OperatorMatrix w;
    w.dim = g.vertex_count;
    w.weights = g.m;
    std::vector<Eigen::Triplet<Complex>> trips;
    for (int x = 0; x < g.vertex_count; ++x) {
        double lam = g.labels[x].block == Block::compact
                         ? 0.0
                         : std::abs(double(g.labels[x].level)) + 0.5;
        trips.emplace_back(x, x, Complex(std::pow(bracket(lam), -s), 0.0));
    }
    w.entries = SparseMatrix(w.dim, w.dim);
    w.entries.setFromTriplets(trips.begin(), trips.end());
    w.hermitian = true;
    return w;
}

struct ConjugateSquaredReport {
    double max_interior_deviation = 0.0;  // A^2 vs the closed five-band form
    double weighted_norm = 0.0;           // || <Lambda>^{-2} A^2 ||
};

/// Funnel ray A squared against its closed form: diagonal (2n^2 + 1/2)/4,
/// -(1/4) e^{-1} (n-1/2)(n-3/2) at (n,n-2), -(1/4) e (n+1/2)(n+3/2) at
/// (n,n+2).  The e-factors follow the Hermitian convention of the assembled
/// operator.  Also reports || <Lambda>^{-2} A^2 ||, which must stay bounded.
inline ConjugateSquaredReport conjugate_squared_check(int n1) {
    require(n1 >= 5, "conjugate squared check: N1 >= 5 required");
    ConjugateBundle b = assemble_A_funnel(n1, FiniteGraphSpec::single_vertex());
    DenseMatrix a = b.A.dense();
    DenseMatrix sq = a * a;
    ConjugateSquaredReport rep;
    const double e = std::exp(1.0), re = std::exp(-1.0);
    for (int n = 2; n + 2 < n1; ++n) {
        double dn = n;
        rep.max_interior_deviation = std::max(
            rep.max_interior_deviation,
            std::abs(sq(n, n) - Complex(0.25 * (2.0 * dn * dn + 0.5), 0.0)));
        rep.max_interior_deviation = std::max(
            rep.max_interior_deviation,
            std::abs(sq(n, n - 2) + Complex(0.25 * re * (dn - 0.5) * (dn - 1.5), 0.0)));
        rep.max_interior_deviation = std::max(
            rep.max_interior_deviation,
            std::abs(sq(n, n + 2) + Complex(0.25 * e * (dn + 0.5) * (dn + 1.5), 0.0)));
    }
    DenseMatrix weighted = sq;
    for (int n = 0; n < n1; ++n)
        weighted.row(n) *= std::pow(bracket(n + 0.5), -2.0);
    Eigen::BDCSVD<DenseMatrix> svd(weighted);
    rep.weighted_norm = svd.singularValues()(0);
    return rep;
}

}  // namespace cusplab
