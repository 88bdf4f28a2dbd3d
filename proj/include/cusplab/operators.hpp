#pragma once

// Matrices acting on l^2(V, m): Laplacians, multiplication and shift
// operators, the gauge transform, and perturbed Laplacians.

#include <cmath>

#include "cusplab/graph.hpp"
#include "cusplab/perturbation.hpp"
#include "cusplab/types.hpp"

namespace cusplab {

/// Finite operator on l^2(V, m), stored sparse together with its weight
/// vector.  `hermitian` flags Hermiticity in the m-weighted product.
struct OperatorMatrix {
    int dim = 0;
    RealVector weights;
    SparseMatrix entries;
    bool hermitian = false;

    DenseMatrix dense() const { return DenseMatrix(entries); }

    ComplexVector apply(const ComplexVector& f) const { return entries * f; }

    /// max |D H - H^dagger D| relative to |D H|, D = diag(weights).
    double weighted_hermiticity_defect() const {
        DenseMatrix dh = weights.asDiagonal() * dense();
        double scale = dh.cwiseAbs().maxCoeff();
        if (scale == 0.0) return 0.0;
        return (dh - dh.adjoint()).cwiseAbs().maxCoeff() / scale;
    }

    static OperatorMatrix from_dense(const DenseMatrix& d, RealVector w, bool herm) {
        OperatorMatrix op;
        op.dim = int(d.rows());
        op.weights = std::move(w);
        op.entries = d.sparseView();
        op.hermitian = herm;
        return op;
    }
};

/// Delta f(x) = (1/m(x)) sum_y E(x,y) (f(x) - f(y)).
inline OperatorMatrix assemble_laplacian(const WeightedGraph& g) {
    OperatorMatrix op;
    op.dim = g.vertex_count;
    op.weights = g.m;
    op.hermitian = true;
    std::vector<Eigen::Triplet<Complex>> trips;
    RealVector diag = RealVector::Zero(g.vertex_count);
    for (int x = 0; x < g.edges.outerSize(); ++x)
        for (SparseRealMatrix::InnerIterator it(g.edges, x); it; ++it) {
            diag(x) += it.value() / g.m(x);
            trips.emplace_back(x, int(it.row()), Complex(-it.value() / g.m(x)));
        }
    for (int x = 0; x < g.vertex_count; ++x)
        if (diag(x) != 0.0) trips.emplace_back(x, x, Complex(diag(x)));
    op.entries = SparseMatrix(g.vertex_count, g.vertex_count);
    op.entries.setFromTriplets(trips.begin(), trips.end());
    op.entries.makeCompressed();
    return op;
}

/// Unit-weight half-line Laplacian Delta_N = 2 - (U + U*) - 1_{{0}}.
inline OperatorMatrix assemble_halfline_laplacian(int n1) {
    return assemble_laplacian(build_halfline(n1));
}

/// Diagonal multiplication operator on l^2(V, m).
inline OperatorMatrix multiplication_operator(const RealVector& values,
                                              const RealVector& weights) {
    require(values.size() == weights.size(), "multiplication: size mismatch");
    OperatorMatrix op;
    op.dim = int(values.size());
    op.weights = weights;
    op.hermitian = true;
    std::vector<Eigen::Triplet<Complex>> trips;
    for (int i = 0; i < op.dim; ++i)
        if (values(i) != 0.0) trips.emplace_back(i, i, Complex(values(i)));
    op.entries = SparseMatrix(op.dim, op.dim);
    op.entries.setFromTriplets(trips.begin(), trips.end());
    return op;
}

struct ShiftOperators {
    OperatorMatrix U;      // Uf(n) = f(n-1), Uf(0) = 0
    OperatorMatrix Ustar;  // U*f(n) = f(n+1)
    OperatorMatrix Q;      // multiplication by n
};

inline ShiftOperators shift_operators(int n1) {
    require(n1 >= 2, "shift operators: N1 >= 2 required");
    ShiftOperators s;
    RealVector ones = RealVector::Ones(n1);
    DenseMatrix u = DenseMatrix::Zero(n1, n1);
    for (int n = 1; n < n1; ++n) u(n, n - 1) = 1.0;
    s.U = OperatorMatrix::from_dense(u, ones, false);
    s.Ustar = OperatorMatrix::from_dense(u.adjoint(), ones, false);
    RealVector q(n1);
    for (int n = 0; n < n1; ++n) q(n) = double(n);
    s.Q = multiplication_operator(q, ones);
    return s;
}

/// Gauge transform data between weights m and m'.
struct GaugePair {
    RealVector t_diagonal;   // sqrt(m/m'), the unitary T_{m->m'}
    RealVector w_potential;  // W(x)
    SparseRealMatrix tilde_e;
};

namespace detail {

// 1 - sqrt(r), rewritten as (1 - r)/(1 + sqrt(r)) near r = 1 to avoid
// cancellation.
inline double one_minus_sqrt(double r) {
    if (std::abs(1.0 - r) < 1e-4) return (1.0 - r) / (1.0 + std::sqrt(r));
    return 1.0 - std::sqrt(r);
}

}  // namespace detail

/// T_{m->m'} f = sqrt(m/m') f;  Delta_{G'} = T (Delta_{Gtilde} - W) T^{-1}
/// with Etilde(x,y) = E'(x,y) sqrt(m(x)m(y)/(m'(x)m'(y))) and
/// W(x) = (1/m(x)) sum_y Etilde(x,y) (1 - sqrt(m(x)m'(y)/(m(y)m'(x)))).
inline GaugePair gauge_transform(const RealVector& m_from, const RealVector& m_to,
                                 const SparseRealMatrix& e_prime) {
    const int n = int(m_from.size());
    require(m_to.size() == n, "gauge: weight vector size mismatch");
    for (int i = 0; i < n; ++i)
        require(m_from(i) > 0.0 && m_to(i) > 0.0, "gauge: weights must be positive");
    GaugePair gp;
    gp.t_diagonal = (m_from.cwiseQuotient(m_to)).cwiseSqrt();
    std::vector<Eigen::Triplet<double>> trips;
    gp.w_potential = RealVector::Zero(n);
    for (int x = 0; x < e_prime.outerSize(); ++x)
        for (SparseRealMatrix::InnerIterator it(e_prime, x); it; ++it) {
            const int y = int(it.row());
            double te = it.value() * std::sqrt(m_from(x) * m_from(y) / (m_to(x) * m_to(y)));
            trips.emplace_back(y, x, te);
            double r = m_from(x) * m_to(y) / (m_from(y) * m_to(x));
            gp.w_potential(x) += te * detail::one_minus_sqrt(r) / m_from(x);
        }
    gp.tilde_e = SparseRealMatrix(n, n);
    gp.tilde_e.setFromTriplets(trips.begin(), trips.end());
    gp.tilde_e.makeCompressed();
    return gp;
}

/// Conjugate H by the diagonal t: t H t^{-1}.
inline DenseMatrix conjugate_by_diagonal(const RealVector& t, const DenseMatrix& h) {
    return t.asDiagonal() * h * t.cwiseInverse().asDiagonal();
}

/// Laplacian of the (mu, eps)-perturbed graph, Hermitian in the
/// m_mu-weighted product.
inline OperatorMatrix assemble_perturbed_laplacian(const WeightedGraph& g,
                                                   const PerturbationSpec& pert) {
    WeightedGraph gp;
    gp.vertex_count = g.vertex_count;
    gp.levels = g.levels;
    gp.fiber_size = g.fiber_size;
    gp.labels = g.labels;
    gp.m = RealVector(g.vertex_count);
    for (int x = 0; x < g.vertex_count; ++x) {
        double mu = pert.mu_at(g.labels[x]);
        require(mu > -1.0, "perturbation: mu must stay above -1");
        gp.m(x) = (1.0 + mu) * g.m(x);
    }
    std::vector<Eigen::Triplet<double>> trips;
    for (int x = 0; x < g.edges.outerSize(); ++x)
        for (SparseRealMatrix::InnerIterator it(g.edges, x); it; ++it) {
            if (it.row() <= x) continue;
            double eps = pert.eps_at(g.labels[x], g.labels[it.row()]);
            require(eps > -1.0, "perturbation: eps must stay above -1");
            detail::add_sym(trips, x, int(it.row()), (1.0 + eps) * it.value());
        }
    gp.edges = detail::build_sparse(g.vertex_count, trips);
    return assemble_laplacian(gp);
}

/// Explicit difference Delta~_{G_{eps,mu}} - Delta_G on l^2(V, m), where
/// Delta~ is the perturbed Laplacian gauged back to the unperturbed weight.
inline OperatorMatrix gauge_difference(const WeightedGraph& g, const PerturbationSpec& pert) {
    const int n = g.vertex_count;
    DenseMatrix d = DenseMatrix::Zero(n, n);
    RealVector mu(n);
    for (int x = 0; x < n; ++x) {
        mu(x) = pert.mu_at(g.labels[x]);
        require(mu(x) > -1.0, "perturbation: mu must stay above -1");
    }
    for (int x = 0; x < g.edges.outerSize(); ++x)
        for (SparseRealMatrix::InnerIterator it(g.edges, x); it; ++it) {
            const int y = int(it.row());
            double eps = pert.eps_at(g.labels[x], g.labels[y]);
            require(eps > -1.0, "perturbation: eps must stay above -1");
            double sxy = std::sqrt((1.0 + mu(x)) * (1.0 + mu(y)));
            // off-diagonal/diagonal pair from the edge term
            double coeff = (eps / sxy -
                            (mu(x) + mu(y) + mu(x) * mu(y)) / (sxy * (1.0 + sxy))) *
                           it.value() / g.m(x);
            d(x, x) += coeff;
            d(x, y) -= coeff;
            // multiplication (W-type) term
            double w = (1.0 + eps) * it.value() * (mu(y) - mu(x)) /
                       (g.m(x) * (1.0 + mu(x)) * std::sqrt(1.0 + mu(y)) *
                        (std::sqrt(1.0 + mu(y)) + std::sqrt(1.0 + mu(x))));
            d(x, x) -= w;
        }
    return OperatorMatrix::from_dense(d, g.m, true);
}

/// Unit-weight frame for gauge-normalized assemblies: carries labels for the
/// weight operators, with m identically 1.
struct NormalizedModel {
    OperatorMatrix h;
    WeightedGraph frame;
};

/// Gauge-normalized single ray: (1/m2)(Delta_N + alpha + c 1_0) with
/// c = 1 - e^{-1/2} (funnel) or -(e^{1/2} - 1) (cusp).  Valid for arbitrary
/// N1 since no exponential weight is ever formed; unitarily equivalent to
/// the weighted ray Laplacian (cusp: to its low-energy block).
inline NormalizedModel normalized_ray_reduction(int n1, Block side, double m2 = 1.0) {
    require(n1 >= 2, "normalized ray: N1 >= 2 required");
    require(side == Block::funnel || side == Block::cusp, "normalized ray: funnel or cusp");
    require(m2 > 0.0, "normalized ray: m2 > 0 required");
    const double alpha = std::exp(0.5) + std::exp(-0.5) - 2.0;
    const double c = side == Block::funnel ? 1.0 - std::exp(-0.5) : -(std::exp(0.5) - 1.0);
    NormalizedModel out;
    out.frame.vertex_count = n1;
    out.frame.levels = n1;
    out.frame.m = RealVector::Ones(n1);
    std::vector<Eigen::Triplet<double>> etrips;
    for (int n = 0; n + 1 < n1; ++n) detail::add_sym(etrips, n, n + 1, 1.0);
    out.frame.edges = detail::build_sparse(n1, etrips);
    out.frame.labels.resize(n1);
    for (int n = 0; n < n1; ++n) out.frame.labels[n] = {side, n, 0};
    std::vector<Eigen::Triplet<Complex>> trips;
    for (int n = 0; n < n1; ++n) {
        double diag = 2.0 + alpha;
        if (n == 0) diag = 1.0 + alpha + c;
        if (n == n1 - 1) diag = side == Block::funnel ? std::exp(-0.5) : std::exp(0.5);
        trips.emplace_back(n, n, Complex(diag / m2, 0.0));
        if (n + 1 < n1) {
            trips.emplace_back(n, n + 1, Complex(-1.0 / m2, 0.0));
            trips.emplace_back(n + 1, n, Complex(-1.0 / m2, 0.0));
        }
    }
    out.h.dim = n1;
    out.h.weights = RealVector::Ones(n1);
    out.h.entries = SparseMatrix(n1, n1);
    out.h.entries.setFromTriplets(trips.begin(), trips.end());
    out.h.hermitian = true;
    return out;
}

/// Perturbed gauge-normalized ray: the radial triple (mu, eps, V) applied to
/// the single ray, symmetrized so every entry stays O(1).  With the zero
/// perturbation this reproduces normalized_ray_reduction exactly.
inline NormalizedModel normalized_ray_reduction_perturbed(int n1, Block side,
                                                          const PerturbationSpec& pert,
                                                          double m2 = 1.0) {
    NormalizedModel out = normalized_ray_reduction(n1, side, m2);
    const double f_prev = side == Block::cusp ? std::exp(0.5) : std::exp(-0.5);
    const double f_next = side == Block::cusp ? std::exp(-0.5) : std::exp(0.5);
    auto label = [&](int n) { return out.frame.labels[n]; };
    std::vector<Eigen::Triplet<Complex>> trips;
    for (int n = 0; n < n1; ++n) {
        double mu_n = pert.mu_at(label(n));
        require(mu_n > -1.0, "normalized ray: mu must stay above -1");
        double diag = 0.0;
        if (n > 0) diag += (1.0 + pert.eps_at(label(n - 1), label(n))) * f_prev;
        if (n + 1 < n1) diag += (1.0 + pert.eps_at(label(n), label(n + 1))) * f_next;
        diag /= 1.0 + mu_n;
        trips.emplace_back(n, n, Complex(diag / m2 + pert.v_at(label(n)), 0.0));
        if (n + 1 < n1) {
            double mu_next = pert.mu_at(label(n + 1));
            require(mu_next > -1.0, "normalized ray: mu must stay above -1");
            double e = 1.0 + pert.eps_at(label(n), label(n + 1));
            require(e > 0.0, "normalized ray: eps must stay above -1");
            double off = -e / (std::sqrt((1.0 + mu_n) * (1.0 + mu_next)) * m2);
            trips.emplace_back(n, n + 1, Complex(off, 0.0));
            trips.emplace_back(n + 1, n, Complex(off, 0.0));
        }
    }
    out.h.entries.setZero();
    out.h.entries.setFromTriplets(trips.begin(), trips.end());
    return out;
}

/// Gauge-normalized glued ray model (single-vertex fiber): funnel ray and
/// cusp ray joined at their level-0 vertices by an edge of the given weight.
/// Vertex order: funnel block then cusp block, matching build_glued_model.
inline NormalizedModel normalized_glued_ray(int n1, double glue_weight = 1.0) {
    require(n1 >= 2, "normalized glued ray: N1 >= 2 required");
    require(glue_weight > 0.0, "normalized glued ray: positive gluing weight required");
    const double alpha = std::exp(0.5) + std::exp(-0.5) - 2.0;
    const int total = 2 * n1;
    NormalizedModel out;
    out.frame.vertex_count = total;
    out.frame.levels = n1;
    out.frame.m = RealVector::Ones(total);
    out.frame.labels.resize(total);
    std::vector<Eigen::Triplet<double>> etrips;
    std::vector<Eigen::Triplet<Complex>> trips;
    auto ray = [&](int off, Block side) {
        double boundary = side == Block::funnel ? std::exp(0.5) : std::exp(-0.5);
        for (int n = 0; n < n1; ++n) {
            out.frame.labels[off + n] = {side, n, 0};
            double diag = 2.0 + alpha;
            if (n == 0) diag = boundary + glue_weight;
            if (n == n1 - 1) diag = side == Block::funnel ? std::exp(-0.5) : std::exp(0.5);
            trips.emplace_back(off + n, off + n, Complex(diag, 0.0));
            if (n + 1 < n1) {
                detail::add_sym(etrips, off + n, off + n + 1, 1.0);
                trips.emplace_back(off + n, off + n + 1, Complex(-1.0, 0.0));
                trips.emplace_back(off + n + 1, off + n, Complex(-1.0, 0.0));
            }
        }
    };
    ray(0, Block::funnel);
    ray(n1, Block::cusp);
    detail::add_sym(etrips, 0, n1, glue_weight);
    trips.emplace_back(0, n1, Complex(-glue_weight, 0.0));
    trips.emplace_back(n1, 0, Complex(-glue_weight, 0.0));
    out.frame.edges = detail::build_sparse(total, etrips);
    out.h.dim = total;
    out.h.weights = RealVector::Ones(total);
    out.h.entries = SparseMatrix(total, total);
    out.h.entries.setFromTriplets(trips.begin(), trips.end());
    out.h.hermitian = true;
    return out;
}

}  // namespace cusplab
