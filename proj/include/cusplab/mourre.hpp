#pragma once

// Commutator computations and Mourre-style checks: the exact half-line
// identity, the funnel/cusp w-identities with compact remainders, double
// commutators, the negative-eigenvalue scan, and weighted decay probes.

#include "cusplab/conjugate.hpp"
#include "cusplab/graph.hpp"
#include "cusplab/operators.hpp"
#include "cusplab/spectral.hpp"

namespace cusplab {

inline double band_alpha() { return std::exp(0.5) + std::exp(-0.5) - 2.0; }
inline double band_beta() { return band_alpha() + 4.0; }

/// w(x) = (m2/2)(x - alpha/m2)(beta/m2 - x), the commutator symbol on the band.
inline double w_function(double x, double m2) {
    return 0.5 * m2 * (x - band_alpha() / m2) * (band_beta() / m2 - x);
}

/// [H, iA] = i(HA - AH) on a shared weighted space.
inline OperatorMatrix commutator(const OperatorMatrix& h, const OperatorMatrix& a) {
    require(h.dim == a.dim, "commutator: dimension mismatch");
    require((h.weights - a.weights).cwiseAbs().maxCoeff() <= 1e-12 * h.weights.maxCoeff(),
            "commutator: weight mismatch");
    OperatorMatrix c;
    c.dim = h.dim;
    c.weights = h.weights;
    c.entries = (Complex(0.0, 1.0) * (h.entries * a.entries - a.entries * h.entries)).eval();
    c.hermitian = h.hermitian && a.hermitian;
    return c;
}

/// f(H) = V f(diag) V^dagger D in the weighted calculus.
inline DenseMatrix apply_function(const EigenDecomposition& eig,
                                  const std::function<double(double)>& f) {
    const int n = eig.source_dim;
    DenseMatrix out = DenseMatrix::Zero(n, n);
    DenseMatrix vdag = eig.eigenvectors.adjoint() * eig.weights.cast<Complex>().asDiagonal();
    for (int j = 0; j < n; ++j) out += f(eig.eigenvalues(j)) * (eig.eigenvectors.col(j) * vdag.row(j));
    return out;
}

inline double operator_norm(const OperatorMatrix& h) {
    Eigen::BDCSVD<DenseMatrix> svd(symmetrize(h));
    return svd.singularValues()(0);
}

struct CommutatorReport {
    OperatorMatrix commutator_op;
    DenseMatrix residual;                 // commutator minus model
    int support_box = -1;                 // origin-side bounding index of the residual
    std::vector<double> tail_profile;     // per-level residual norms
    double max_interior_deviation = 0.0;
    double he_block_norm = -1.0;          // cusp only
    double closed_form_deviation = -1.0;  // funnel only
    CompactnessWitness witness;
    bool witness_valid = false;
};

/// [Delta_N, iA_N] = (1/2) Delta_N (4 - Delta_N) + K1, with K1 supported in
/// [[0,2]]^2; the truncation edge contributes its own boundary band.
inline CommutatorReport halfline_commutator_identity(int n1) {
    require(n1 >= 6, "halfline identity: N1 >= 6 required");
    OperatorMatrix delta = assemble_halfline_laplacian(n1);
    OperatorMatrix a = assemble_A_halfline(n1);
    CommutatorReport rep;
    rep.commutator_op = commutator(delta, a);
    DenseMatrix d = delta.dense();
    DenseMatrix model = 0.5 * d * (4.0 * DenseMatrix::Identity(n1, n1) - d);
    rep.residual = rep.commutator_op.dense() - model;
    const double thresh = 1e-12 * 4.0;
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n1; ++j) {
            bool low_corner = i <= 2 && j <= 2;
            bool edge_band = i >= n1 - 3 || j >= n1 - 3;
            double v = std::abs(rep.residual(i, j));
            if (low_corner && v > thresh) rep.support_box = std::max(rep.support_box, std::max(i, j));
            if (!low_corner && !edge_band)
                rep.max_interior_deviation = std::max(rep.max_interior_deviation, v);
        }
    return rep;
}

namespace detail {

// (1/m1) tensor Delta_2 as an operator on the product space.
inline OperatorMatrix fiber_coupling_operator(const WeightedGraph& g, const FiniteGraphSpec& fiber) {
    const int p = fiber.p;
    const int n1 = g.levels;
    RealMatrix l2 = RealMatrix::Zero(p, p);
    for (const auto& [i, j, wgt] : fiber.edges) {
        l2(i, i) += wgt / fiber.m2;
        l2(j, j) += wgt / fiber.m2;
        l2(i, j) -= wgt / fiber.m2;
        l2(j, i) -= wgt / fiber.m2;
    }
    OperatorMatrix b;
    b.dim = g.vertex_count;
    b.weights = g.m;
    std::vector<Eigen::Triplet<Complex>> trips;
    for (int n = 0; n < n1; ++n) {
        double inv_m1 = fiber.m2 / g.m(n * p);  // m = m1 m2, so m2/m = 1/m1
        for (int k = 0; k < p; ++k)
            for (int l = 0; l < p; ++l)
                if (l2(k, l) != 0.0)
                    trips.emplace_back(n * p + k, n * p + l, Complex(inv_m1 * l2(k, l), 0.0));
    }
    b.entries = SparseMatrix(b.dim, b.dim);
    b.entries.setFromTriplets(trips.begin(), trips.end());
    b.hermitian = true;
    return b;
}

}  // namespace detail

/// Funnel: residual of [Delta, iA] - w(Delta) against the coupling-term
/// commutator [(1/m1) tensor Delta_2, iA]; the residual must pass the
/// compactness witness and match that closed-form term away from the
/// boundary and the truncation edge.
inline CommutatorReport funnel_commutator_identity(int n1, const FiniteGraphSpec& fiber,
                                                   int interior_from = 25, int edge_buffer = 20) {
    require(n1 >= interior_from + edge_buffer + 5, "funnel identity: N1 too small for the window");
    WeightedGraph g = twisted_product(build_funnel_ray(n1), fiber);
    OperatorMatrix h = assemble_laplacian(g);
    ConjugateBundle bundle = assemble_A_funnel(n1, fiber);
    CommutatorReport rep;
    rep.commutator_op = commutator(h, bundle.A);
    EigenDecomposition eig = eigendecompose(h);
    DenseMatrix model = apply_function(eig, [&](double x) { return w_function(x, fiber.m2); });
    rep.residual = rep.commutator_op.dense() - model;
    // the truncation edge carries its own O(1) boundary band; witness the
    // residual on the trimmed block only
    const int keep = (n1 - 5) * fiber.p;
    WeightedGraph trimmed = twisted_product(build_funnel_ray(n1 - 5), fiber);
    rep.witness = compactness_witness(rep.residual.topLeftCorner(keep, keep), trimmed);
    rep.witness_valid = true;
    rep.tail_profile = rep.witness.tail_norms;
    OperatorMatrix coupling = detail::fiber_coupling_operator(g, fiber);
    DenseMatrix closed = commutator(coupling, bundle.A).dense();
    const int p = fiber.p;
    for (int i = interior_from * p; i < (n1 - edge_buffer) * p; ++i)
        for (int j = interior_from * p; j < (n1 - edge_buffer) * p; ++j)
            rep.closed_form_deviation =
                std::max(rep.closed_form_deviation, std::abs(rep.residual(i, j) - closed(i, j)));
    return rep;
}

/// Cusp: the high-energy block of [Delta, iA] vanishes identically (A
/// carries an exact P_le factor); the low-energy residual against w(Delta)
/// is finitely supported near the origin.
inline CommutatorReport cusp_commutator_identity(int n1, const FiniteGraphSpec& fiber) {
    require(n1 >= 6, "cusp identity: N1 >= 6 required");
    WeightedGraph g = twisted_product(build_cusp_ray(n1), fiber);
    OperatorMatrix h = assemble_laplacian(g);
    ConjugateBundle bundle = assemble_A_cusp(n1, fiber);
    CommutatorReport rep;
    rep.commutator_op = commutator(h, bundle.A);
    DenseMatrix c = rep.commutator_op.dense();
    DenseMatrix ple = bundle.p_le.toDense();
    DenseMatrix phe = DenseMatrix::Identity(g.vertex_count, g.vertex_count) - ple;
    rep.he_block_norm = (phe * c * phe).cwiseAbs().maxCoeff();
    // On the low-energy subspace the product reduces exactly to the ray:
    // Delta acts as Delta_1c / m2 and A as the ray conjugate operator, so
    // the le residual is computed there (the full-space sandwich would mix
    // the huge he eigenvalues through fp cancellation).
    WeightedGraph ray = build_cusp_ray(n1);
    OperatorMatrix h_le;
    h_le.dim = n1;
    h_le.weights = ray.m;
    h_le.entries = (assemble_laplacian(ray).entries / fiber.m2).eval();
    h_le.hermitian = true;
    OperatorMatrix a_le;
    a_le.dim = n1;
    a_le.weights = ray.m;
    a_le.entries = detail::conjugate_tridiagonal(n1, std::exp(0.5), std::exp(-0.5));
    a_le.hermitian = true;
    // symmetrized frame: fp noise stays flat instead of growing like e^{n/2}
    DenseMatrix hs = symmetrize(h_le), as = symmetrize(a_le);
    DenseMatrix c_le = Complex(0.0, 1.0) * (hs * as - as * hs);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(hs);
    DenseMatrix model = DenseMatrix::Zero(n1, n1);
    for (int j = 0; j < n1; ++j)
        model += w_function(solver.eigenvalues()(j), fiber.m2) *
                 (solver.eigenvectors().col(j) * solver.eigenvectors().col(j).adjoint());
    rep.residual = c_le - model;
    const int p = 1;
    // residual support: largest level carrying anything above threshold,
    // excluding the truncation-edge band
    const double thresh = 1e-11;
    for (int n = 0; n + 4 < n1; ++n) {
        double block_max = 0.0;
        for (int k = 0; k < p; ++k)
            for (int j = 0; j + 4 * p < n1 * p; ++j)
                block_max = std::max(block_max, std::abs(rep.residual(n * p + k, j)));
        rep.tail_profile.push_back(block_max);
        if (block_max > thresh) rep.support_box = n;
    }
    for (int n = 4; n + 4 < n1; ++n)
        rep.max_interior_deviation = std::max(rep.max_interior_deviation, rep.tail_profile[n]);
    return rep;
}

/// || [[H, iA], iA] ||; the caller compares across truncation sizes.
inline double double_commutator_norm(const OperatorMatrix& h, const OperatorMatrix& a) {
    OperatorMatrix c1 = commutator(h, a);
    OperatorMatrix c2 = commutator(c1, a);
    return operator_norm(c2);
}

struct MourreScanResult {
    SpectralWindow window;
    double c = 0.0;
    double tau = 0.0;
    int window_rank = 0;
    int negative_count = 0;
    bool out_of_band = false;
};

/// Counts eigenvalues of E_I([H,iA] - c) E_I, restricted to ran E_I, below
/// -tau.  tau <= 0 requests the default 1e-8 ||[H,iA]||.
inline MourreScanResult mourre_scan(const OperatorMatrix& h, const OperatorMatrix& a,
                                    const SpectralWindow& window, double c, double m2,
                                    double tau = -1.0) {
    require(c > 0.0, "mourre scan: c > 0 required");
    MourreScanResult res;
    res.window = window;
    res.c = c;
    res.out_of_band = window.a <= band_alpha() / m2 || window.b >= band_beta() / m2;
    OperatorMatrix comm = commutator(h, a);
    res.tau = tau > 0.0 ? tau : 1e-8 * operator_norm(comm);
    EigenDecomposition eig = eigendecompose(h);
    std::vector<int> sel;
    for (int j = 0; j < eig.source_dim; ++j)
        if (window.contains(eig.eigenvalues(j))) sel.push_back(j);
    res.window_rank = int(sel.size());
    if (sel.empty()) return res;
    DenseMatrix vs(eig.source_dim, sel.size());
    for (size_t j = 0; j < sel.size(); ++j) vs.col(j) = eig.eigenvectors.col(sel[j]);
    DenseMatrix compressed = vs.adjoint() * eig.weights.cast<Complex>().asDiagonal() *
                                 comm.dense() * vs -
                             c * DenseMatrix::Identity(sel.size(), sel.size());
    compressed = 0.5 * (compressed + compressed.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(compressed);
    for (int j = 0; j < solver.eigenvalues().size(); ++j)
        if (solver.eigenvalues()(j) < -res.tau) ++res.negative_count;
    return res;
}

/// sup over random unit vectors of || <Lambda>^eps [H_pert - H_free, iA] f ||
/// in the weighted norm: the finite stand-in for the C^{0,1} bound.
inline double weighted_commutator_decay(const OperatorMatrix& h_pert, const OperatorMatrix& h_free,
                                        const OperatorMatrix& a, const WeightedGraph& g,
                                        double eps_exponent, int samples = 24,
                                        std::uint64_t seed = 7) {
    require(h_pert.dim == h_free.dim && h_pert.dim == a.dim,
            "weighted commutator decay: dimension mismatch");
    OperatorMatrix diff;
    diff.dim = h_free.dim;
    diff.weights = h_free.weights;
    diff.entries = h_pert.entries - h_free.entries;
    diff.hermitian = false;  // Hermitian in h_pert's weights, not h_free's
    OperatorMatrix c;
    c.dim = diff.dim;
    c.weights = diff.weights;
    c.entries = (Complex(0.0, 1.0) * (diff.entries * a.entries - a.entries * diff.entries)).eval();
    RealVector wgt(g.vertex_count);
    for (int x = 0; x < g.vertex_count; ++x) {
        double lam = g.labels[x].block == Block::compact
                         ? 0.0
                         : std::abs(double(g.labels[x].level)) + 0.5;
        wgt(x) = std::pow(bracket(lam), eps_exponent);
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double sup = 0.0;
    RealVector root = g.m.cwiseSqrt();
    for (int s = 0; s < samples; ++s) {
        ComplexVector f(g.vertex_count);
        for (int i = 0; i < g.vertex_count; ++i) f(i) = Complex(gauss(rng), gauss(rng));
        f /= (root.cast<Complex>().array() * f.array()).matrix().norm();  // unit in l2(m)
        ComplexVector y = c.entries * f;
        y = (wgt.cast<Complex>().array() * y.array()).matrix();
        sup = std::max(sup, (root.cast<Complex>().array() * y.array()).matrix().norm());
    }
    return sup;
}

}  // namespace cusplab
