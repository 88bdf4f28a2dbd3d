#pragma once

// Dense/sparse linear algebra: symmetrization to the standard product,
// eigendecompositions, spectral projections, resolvent solves, unitary
// evolution, and the finite-dimensional compactness witness.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <cstdint>
#include <random>

#include "cusplab/graph.hpp"
#include "cusplab/operators.hpp"

namespace cusplab {

inline constexpr int kDenseEigenCap = 6000;

struct EigenDecomposition {
    RealVector eigenvalues;   // ascending
    DenseMatrix eigenvectors; // columns, orthonormal in the weighted product
    RealVector weights;
    int source_dim = 0;
    double residual_norm = 0.0;  // max ||Hv - lambda v|| over columns
};

struct SpectralWindow {
    double a = 0.0, b = 0.0;  // closed interval, endpoints included
    bool contains(double x) const { return x >= a && x <= b; }
};

/// D^{1/2} H D^{-1/2}: same spectrum, Hermitian in the standard product.
inline DenseMatrix symmetrize(const OperatorMatrix& h) {
    require(h.hermitian, "symmetrize: operator not flagged Hermitian in its weighted product");
    RealVector root = h.weights.cwiseSqrt();
    DenseMatrix s = root.cast<Complex>().asDiagonal() * h.dense() *
                    root.cwiseInverse().cast<Complex>().asDiagonal();
    return 0.5 * (s + s.adjoint().eval());
}

/// Sparse symmetrized copy, for resolvent factorizations at large dims.
inline SparseMatrix symmetrize_sparse(const OperatorMatrix& h) {
    require(h.hermitian, "symmetrize: operator not flagged Hermitian in its weighted product");
    RealVector root = h.weights.cwiseSqrt();
    std::vector<Eigen::Triplet<Complex>> trips;
    for (int x = 0; x < h.entries.outerSize(); ++x)
        for (SparseMatrix::InnerIterator it(h.entries, x); it; ++it)
            trips.emplace_back(int(it.row()), x,
                               it.value() * root(it.row()) / root(x));
    SparseMatrix s(h.dim, h.dim);
    s.setFromTriplets(trips.begin(), trips.end());
    return s;
}

inline EigenDecomposition eigendecompose(const OperatorMatrix& h, int dense_cap = kDenseEigenCap) {
    require(h.dim <= dense_cap,
            "eigendecompose: dimension exceeds the dense cap; reduce N1 or raise --max-dim");
    DenseMatrix s = symmetrize(h);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(s);
    require(solver.info() == Eigen::Success, "eigendecompose: solver failed");
    EigenDecomposition out;
    out.eigenvalues = solver.eigenvalues();
    RealVector invroot = h.weights.cwiseSqrt().cwiseInverse();
    out.eigenvectors = invroot.cast<Complex>().asDiagonal() * solver.eigenvectors();
    out.weights = h.weights;
    out.source_dim = h.dim;
    DenseMatrix hd = h.dense();
    for (int j = 0; j < h.dim; ++j) {
        double r = (hd * out.eigenvectors.col(j) -
                    out.eigenvalues(j) * out.eigenvectors.col(j))
                       .norm();
        out.residual_norm = std::max(out.residual_norm, r);
    }
    return out;
}

/// Weighted-orthogonal projection onto eigenvectors with eigenvalue in the
/// window; empty window gives the zero matrix.
inline DenseMatrix spectral_projection(const EigenDecomposition& eig, const SpectralWindow& window) {
    require(window.a <= window.b, "spectral window: a <= b required");
    const int n = eig.source_dim;
    DenseMatrix proj = DenseMatrix::Zero(n, n);
    DenseMatrix dconj = eig.weights.cast<Complex>().asDiagonal();
    for (int j = 0; j < n; ++j)
        if (window.contains(eig.eigenvalues(j)))
            proj += eig.eigenvectors.col(j) * (eig.eigenvectors.col(j).adjoint() * dconj);
    return proj;
}

inline int window_rank(const EigenDecomposition& eig, const SpectralWindow& window) {
    int r = 0;
    for (int j = 0; j < eig.source_dim; ++j)
        if (window.contains(eig.eigenvalues(j))) ++r;
    return r;
}

/// (H - z)^{-1} f by direct sparse factorization.
inline ComplexVector resolvent_apply(const OperatorMatrix& h, Complex z, const ComplexVector& f) {
    require(std::abs(z.imag()) > 0.0, "resolvent: Im z must be nonzero");
    SparseMatrix shifted = h.entries;
    SparseMatrix id(h.dim, h.dim);
    id.setIdentity();
    shifted = shifted - z * id;
    shifted.makeCompressed();
    Eigen::SparseLU<SparseMatrix> lu(shifted);
    require(lu.info() == Eigen::Success, "resolvent: factorization failed");
    return lu.solve(f);
}

namespace detail {

// Largest singular value of x -> w(S - z)^{-1}(w x), via power iteration on
// the normal operator; S Hermitian so the adjoint solve shifts by conj(z).
inline double weighted_resolvent_norm_sparse(const SparseMatrix& sym, const RealVector& w,
                                             Complex z, int max_iter, double tol,
                                             std::uint64_t seed = 12345) {
    const int n = int(sym.rows());
    SparseMatrix id(n, n);
    id.setIdentity();
    SparseMatrix a = sym - z * id;
    SparseMatrix aadj = sym - std::conj(z) * id;
    a.makeCompressed();
    aadj.makeCompressed();
    Eigen::SparseLU<SparseMatrix> lu(a), lu_adj(aadj);
    require(lu.info() == Eigen::Success && lu_adj.info() == Eigen::Success,
            "weighted resolvent: factorization failed");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    ComplexVector x(n);
    for (int i = 0; i < n; ++i) x(i) = Complex(gauss(rng), gauss(rng));
    x.normalize();
    double est = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        ComplexVector y = lu.solve((w.cast<Complex>().array() * x.array()).matrix());
        y = (w.cast<Complex>().array() * y.array()).matrix();
        double next = y.norm();
        ComplexVector back = lu_adj.solve((w.cast<Complex>().array() * y.array()).matrix());
        back = (w.cast<Complex>().array() * back.array()).matrix();
        double bn = back.norm();
        if (bn == 0.0) return 0.0;
        x = back / bn;
        if (it > 3 && std::abs(next - est) <= tol * next) {
            est = next;
            break;
        }
        est = next;
    }
    return est;
}

}  // namespace detail

/// || w (H - z)^{-1} w || with w a diagonal weight (e.g. <Lambda>^{-s}),
/// measured in the weighted operator norm.
inline double weighted_resolvent_norm(const OperatorMatrix& h, const OperatorMatrix& lambda_weight,
                                      Complex z, int max_iter = 300, double tol = 1e-10,
                                      std::uint64_t seed = 12345) {
    require(std::abs(z.imag()) > 0.0, "weighted resolvent: Im z must be nonzero");
    require(h.dim == lambda_weight.dim, "weighted resolvent: dimension mismatch");
    RealVector w(h.dim);
    for (int i = 0; i < h.dim; ++i) w(i) = lambda_weight.entries.coeff(i, i).real();
    // diagonal weights commute with D^{1/2}, so the weighted norm equals the
    // standard norm of w (S - z)^{-1} w
    return detail::weighted_resolvent_norm_sparse(symmetrize_sparse(h), w, z, max_iter, tol, seed);
}

/// e^{-itH} f for each t, via the spectral calculus.
inline std::vector<ComplexVector> evolve(const EigenDecomposition& eig, const ComplexVector& f,
                                         const std::vector<double>& times) {
    ComplexVector coeff =
        eig.eigenvectors.adjoint() * (eig.weights.cast<Complex>().asDiagonal() * f);
    std::vector<ComplexVector> out;
    out.reserve(times.size());
    for (double t : times) {
        ComplexVector phased(eig.source_dim);
        for (int j = 0; j < eig.source_dim; ++j)
            phased(j) = std::exp(Complex(0.0, -eig.eigenvalues(j) * t)) * coeff(j);
        out.push_back(eig.eigenvectors * phased);
    }
    return out;
}

struct CompactnessWitness {
    std::vector<double> tail_norms;       // || block over levels >= n ||
    std::vector<double> top_singular;     // top 20 singular values of K
    int tail_below_tol_at = -1;           // first level with tail < tol
    bool witnessed_compact = false;
    double tol = 1e-6;
};

/// Finite-dimensional compactness proxy: tail block norms must fall below
/// tol before half the levels and the top singular values must decay.
inline CompactnessWitness compactness_witness(const DenseMatrix& k, const WeightedGraph& g,
                                              double tol = 1e-6) {
    require(int(k.rows()) == g.vertex_count, "compactness witness: size mismatch");
    require(!g.labels.empty(), "compactness witness: labeled graph required");
    CompactnessWitness w;
    w.tol = tol;
    int max_level = 0;
    for (const auto& l : g.labels)
        if (l.block != Block::compact) max_level = std::max(max_level, std::abs(l.level));
    for (int n = 0; n <= max_level; ++n) {
        std::vector<int> idx;
        for (int x = 0; x < g.vertex_count; ++x)
            if (g.labels[x].block != Block::compact && std::abs(g.labels[x].level) >= n)
                idx.push_back(x);
        DenseMatrix block(idx.size(), idx.size());
        for (size_t i = 0; i < idx.size(); ++i)
            for (size_t j = 0; j < idx.size(); ++j) block(i, j) = k(idx[i], idx[j]);
        Eigen::BDCSVD<DenseMatrix> svd(block);
        double nrm = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
        w.tail_norms.push_back(nrm);
        if (w.tail_below_tol_at < 0 && nrm < tol) w.tail_below_tol_at = n;
    }
    Eigen::BDCSVD<DenseMatrix> svd(k);
    int count = std::min<int>(20, int(svd.singularValues().size()));
    for (int i = 0; i < count; ++i) w.top_singular.push_back(svd.singularValues()(i));
    bool tail_ok = w.tail_below_tol_at >= 0 && w.tail_below_tol_at <= (max_level + 1) / 2;
    bool sv_decay = count >= 2 && w.top_singular.back() < 0.9 * w.top_singular.front();
    w.witnessed_compact = tail_ok && sv_decay;
    return w;
}

}  // namespace cusplab
