#pragma once

// Finite-section probes of the limiting absorption principle: two-parameter
// (rho, N1) resolvent scans, fixed-horizon propagation integrals, and
// threshold eigenvalue-accumulation studies.

#include <map>
#include <optional>

#include "cusplab/mourre.hpp"
#include "cusplab/spectral.hpp"

namespace cusplab {

struct LapModel {
    OperatorMatrix h;
    OperatorMatrix weight;  // diagonal <Lambda>^{-s}
};

using LapModelBuilder = std::function<LapModel(int)>;

struct LapScanConfig {
    std::vector<double> lambdas;
    std::vector<double> rhos;        // strictly decreasing, positive
    double s = 1.0;                  // > 1/2
    std::vector<int> truncations;    // strictly increasing
    double convergence_tol = 0.05;   // relative agreement between consecutive N1
    double threshold_margin = 0.05;  // minimum distance of lambda to alpha/m2, beta/m2
    double m2 = 1.0;
    std::uint64_t seed = 12345;      // probe vector for the norm estimator

    void validate() const {
        require(s > 0.5, "lap scan: s > 1/2 required");
        require(!rhos.empty() && !lambdas.empty() && truncations.size() >= 2,
                "lap scan: nonempty grids and at least two truncations required");
        for (size_t i = 0; i < rhos.size(); ++i) {
            require(rhos[i] > 0.0, "lap scan: rho must be positive");
            require(i == 0 || rhos[i] < rhos[i - 1], "lap scan: rho grid must decrease");
        }
        for (size_t i = 1; i < truncations.size(); ++i)
            require(truncations[i] > truncations[i - 1], "lap scan: truncations must increase");
    }
};

enum class LapVerdict { plateau, growth, unresolved };

inline const char* lap_verdict_name(LapVerdict v) {
    switch (v) {
        case LapVerdict::plateau: return "plateau";
        case LapVerdict::growth: return "growth";
        default: return "unresolved";
    }
}

struct LapCell {
    double lambda = 0.0, rho = 0.0, norm = 0.0;
    int n1_used = 0;
    bool resolved = false;
};

struct LapScanReport {
    std::vector<LapCell> cells;  // lambda-major, rho-minor order
    std::map<double, LapVerdict> verdicts;
    bool all_resolved = true;
};

/// Weighted resolvent norms over the (lambda, rho) grid; each cell uses the
/// smallest truncation where consecutive sizes agree within tol.  Unresolved
/// cells are reported as such and block any per-lambda verdict.
inline LapScanReport lap_scan(const LapModelBuilder& builder, const LapScanConfig& cfg) {
    cfg.validate();
    for (double l : cfg.lambdas) {
        require(std::abs(l - band_alpha() / cfg.m2) >= cfg.threshold_margin &&
                    std::abs(l - band_beta() / cfg.m2) >= cfg.threshold_margin,
                "lap scan: lambda grid must avoid the thresholds; shrink it or study "
                "thresholds with threshold_margin 0 explicitly");
    }
    LapScanReport rep;
    std::map<int, LapModel> cache;
    auto model = [&](int n1) -> const LapModel& {
        auto it = cache.find(n1);
        if (it == cache.end()) it = cache.emplace(n1, builder(n1)).first;
        return it->second;
    };
    for (double lambda : cfg.lambdas) {
        std::vector<double> norms;
        bool lambda_resolved = true;
        for (double rho : cfg.rhos) {
            LapCell cell;
            cell.lambda = lambda;
            cell.rho = rho;
            double prev = -1.0;
            for (int n1 : cfg.truncations) {
                const LapModel& m = model(n1);
                double v = weighted_resolvent_norm(m.h, m.weight, Complex(lambda, rho), 300, 1e-10, cfg.seed);
                if (prev > 0.0 && std::abs(v - prev) <= cfg.convergence_tol * std::abs(v)) {
                    cell.norm = v;
                    cell.n1_used = n1;
                    cell.resolved = true;
                    break;
                }
                prev = v;
            }
            if (!cell.resolved) {
                lambda_resolved = false;
                rep.all_resolved = false;
            } else {
                norms.push_back(cell.norm);
            }
            rep.cells.push_back(cell);
        }
        if (!lambda_resolved) {
            rep.verdicts[lambda] = LapVerdict::unresolved;
            continue;
        }
        std::vector<double> sorted = norms;
        std::sort(sorted.begin(), sorted.end());
        double median = sorted[sorted.size() / 2];
        int tail = std::min<int>(3, int(norms.size()));
        double max_small_rho = 0.0;  // rhos decrease, so the tail cells are the smallest
        for (int i = 0; i < tail; ++i)
            max_small_rho = std::max(max_small_rho, norms[norms.size() - 1 - i]);
        rep.verdicts[lambda] = std::abs(max_small_rho - median) <= 0.2 * median
                                   ? LapVerdict::plateau
                                   : LapVerdict::growth;
    }
    return rep;
}

/// Trapezoid approximation of the propagation integral
/// int_{-T}^{T} || <Lambda>^{-s} e^{-itH} E_{[a,b]} f ||^2 dt.
inline double propagation_integral(const EigenDecomposition& eig, const RealVector& weight,
                                   const SpectralWindow& window, const ComplexVector& f, double horizon,
                                   double dt) {
    require(horizon > 0.0 && dt > 0.0 && dt <= 2.0 * horizon, "propagation: bad time grid");
    ComplexVector coeff =
        eig.eigenvectors.adjoint() * (eig.weights.cast<Complex>().asDiagonal() * f);
    for (int j = 0; j < eig.source_dim; ++j)
        if (!window.contains(eig.eigenvalues(j))) coeff(j) = 0.0;
    RealVector root = eig.weights.cwiseSqrt();
    auto integrand = [&](double t) {
        ComplexVector phased(eig.source_dim);
        for (int j = 0; j < eig.source_dim; ++j)
            phased(j) = std::exp(Complex(0.0, -eig.eigenvalues(j) * t)) * coeff(j);
        ComplexVector psi = eig.eigenvectors * phased;
        return (root.cast<Complex>().array() * weight.cast<Complex>().array() * psi.array())
            .matrix()
            .squaredNorm();
    };
    const int steps = int(std::ceil(2.0 * horizon / dt));
    const double h = 2.0 * horizon / steps;
    double sum = 0.5 * (integrand(-horizon) + integrand(horizon));
    for (int k = 1; k < steps; ++k) sum += integrand(-horizon + k * h);
    return sum * h;
}

struct ThresholdCounts {
    int n1 = 0;
    int interior = 0;
    int near_alpha = 0;
    int near_beta = 0;
};

struct ThresholdReport {
    std::vector<ThresholdCounts> counts;
    bool interior_stable = false;
};

/// Eigenvalue counts strictly inside the band vs in threshold neighborhoods
/// across truncations; interior counts must stabilize at the top two sizes.
inline ThresholdReport threshold_study(const std::function<OperatorMatrix(int)>& builder,
                                       const SpectralWindow& window, double band_margin,
                                       const std::vector<int>& truncations, double m2) {
    require(truncations.size() >= 2, "threshold study: at least two truncations");
    ThresholdReport rep;
    const double a = band_alpha() / m2, b = band_beta() / m2;
    for (int n1 : truncations) {
        OperatorMatrix h = builder(n1);
        EigenDecomposition eig = eigendecompose(h);
        ThresholdCounts c;
        c.n1 = n1;
        for (int j = 0; j < eig.source_dim; ++j) {
            double ev = eig.eigenvalues(j);
            if (window.contains(ev)) ++c.interior;
            if (std::abs(ev - a) <= band_margin) ++c.near_alpha;
            if (std::abs(ev - b) <= band_margin) ++c.near_beta;
        }
        rep.counts.push_back(c);
    }
    size_t n = rep.counts.size();
    rep.interior_stable = rep.counts[n - 1].interior == rep.counts[n - 2].interior;
    return rep;
}

/// Eigenvalues of the two largest truncations that match within match_tol:
/// the proxy for genuine point spectrum the lambda grid must avoid.
inline std::vector<double> persistent_eigenvalues(const std::function<OperatorMatrix(int)>& builder,
                                                  int n_a, int n_b, double match_tol) {
    EigenDecomposition ea = eigendecompose(builder(n_a));
    EigenDecomposition eb = eigendecompose(builder(n_b));
    std::vector<double> out;
    int j = 0;
    for (int i = 0; i < ea.source_dim; ++i) {
        while (j < eb.source_dim && eb.eigenvalues(j) < ea.eigenvalues(i) - match_tol) ++j;
        if (j < eb.source_dim && std::abs(eb.eigenvalues(j) - ea.eigenvalues(i)) <= match_tol)
            out.push_back(ea.eigenvalues(i));
    }
    return out;
}

}  // namespace cusplab
