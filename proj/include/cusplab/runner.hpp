#pragma once

// Command dispatch: one ExperimentConfig in, one Report out.  Exit-code
// policy lives here: 0 all verdicts pass, 2 some verdict failed; config and
// validation errors throw and the CLI maps them to 1.

#include <string>

#include "cusplab/config.hpp"
#include "cusplab/conjugate.hpp"
#include "cusplab/lap.hpp"
#include "cusplab/mourre.hpp"
#include "cusplab/operators.hpp"
#include "cusplab/perturbation.hpp"
#include "cusplab/report.hpp"
#include "cusplab/spectral.hpp"

namespace cusplab {

namespace detail {

/// Hamiltonian on l^2(V, m): the free Laplacian, plus (when a perturbation
/// is configured) the perturbed Laplacian gauged back to the free weight and
/// the potential V.  Everything downstream (conjugate operators, weights)
/// then lives on one weighted space.
inline OperatorMatrix assemble_hamiltonian(const WeightedGraph& g, const ExperimentConfig& cfg) {
    OperatorMatrix h = assemble_laplacian(g);
    if (!cfg.has_perturbation) return h;
    OperatorMatrix diff = gauge_difference(g, cfg.perturbation);
    std::vector<Eigen::Triplet<Complex>> trips;
    for (int x = 0; x < g.vertex_count; ++x) {
        double v = cfg.perturbation.v_at(g.labels.empty() ? VertexLabel{} : g.labels[x]);
        if (v != 0.0) trips.emplace_back(x, x, Complex(v, 0.0));
    }
    SparseMatrix pot(h.dim, h.dim);
    pot.setFromTriplets(trips.begin(), trips.end());
    h.entries = SparseMatrix(h.entries + diff.entries + pot);
    return h;
}

inline WeightedGraph build_with_length(GeometrySpec spec, int n1) {
    spec.ray_length = n1;
    return build_geometry(spec);
}

inline ConjugateBundle conjugate_for(const GeometrySpec& spec) {
    switch (spec.kind) {
        case GeometryKind::half_ray_funnel: return assemble_A_funnel(spec.ray_length, spec.fiber);
        case GeometryKind::half_ray_cusp: return assemble_A_cusp(spec.ray_length, spec.fiber);
        case GeometryKind::glued: return assemble_A_glued(spec);
        default:
            throw InvalidArgument("conjugate operator: supported for cusp, funnel, glued");
    }
}

inline std::vector<int> int_list(const Json& j, const std::string& name) {
    std::vector<int> out;
    for (const auto& v : j) out.push_back(v.get<int>());
    require(!out.empty(), name + ": empty list");
    return out;
}

inline std::vector<double> double_list(const Json& j, const std::string& name) {
    std::vector<double> out;
    for (const auto& v : j) out.push_back(v.get<double>());
    require(!out.empty(), name + ": empty list");
    return out;
}

inline void run_build(const ExperimentConfig& cfg, Report& rep) {
    WeightedGraph g = build_geometry(cfg.geometry);
    g.validate();
    OperatorMatrix h = assemble_hamiltonian(g, cfg);
    rep.results["vertex_count"] = g.vertex_count;
    rep.results["edge_count"] = int(g.edges.nonZeros() / 2);
    rep.results["total_measure"] = g.total_measure();
    rep.results["components"] = g.component_count();
    double defect = h.weighted_hermiticity_defect();
    rep.results["hermiticity_defect"] = defect;
    rep.add_verdict("weighted_hermiticity", defect <= 1e-12, 1e-12,
                    "relative defect of D H - H^dagger D");
    if (h.dim <= cfg.max_dim) {
        EigenDecomposition eig = eigendecompose(h, cfg.max_dim);
        double lo = eig.eigenvalues.minCoeff();
        double scale = std::max(1.0, std::abs(eig.eigenvalues.maxCoeff()));
        rep.results["min_eigenvalue"] = lo;
        // relative to the spectral radius: exponential weights push the top
        // of the spectrum to e^{N1} and absolute fp bounds are meaningless.
        // A potential V may legitimately create negative spectrum.
        if (!cfg.has_perturbation)
            rep.add_verdict("positivity", lo >= -1e-10 * scale, 1e-10,
                            "smallest eigenvalue, relative to the spectral radius");
    }
}

inline void run_spectrum(const ExperimentConfig& cfg, Report& rep) {
    WeightedGraph g = build_geometry(cfg.geometry);
    OperatorMatrix h = assemble_hamiltonian(g, cfg);
    require(h.dim <= cfg.max_dim,
            "spectrum: dimension exceeds --max-dim; reduce N1 or raise the cap");
    EigenDecomposition eig = eigendecompose(h, cfg.max_dim);
    rep.results["count"] = eig.source_dim;
    rep.results["min_eigenvalue"] = eig.eigenvalues.minCoeff();
    rep.results["max_eigenvalue"] = eig.eigenvalues.maxCoeff();
    rep.results["residual_norm"] = eig.residual_norm;
    double scale = std::max(1.0, std::abs(eig.eigenvalues.maxCoeff()));
    if (!cfg.has_perturbation)
        rep.add_verdict("positivity", eig.eigenvalues.minCoeff() >= -1e-10 * scale, 1e-10,
                        "smallest eigenvalue, relative to the spectral radius");
    CsvSeries s;
    s.filename = "eigenvalues.csv";
    s.columns = {"eigenvalue"};
    for (int i = 0; i < eig.source_dim; ++i) s.add_row({format_float(eig.eigenvalues(i))});
    rep.series.push_back(s);
}

inline void run_commutator_check(const ExperimentConfig& cfg, Report& rep) {
    std::string model = cfg.command_params.value("model", "");
    const int n1 = cfg.geometry.ray_length;
    CommutatorReport cr;
    double default_tol = 1e-12;
    if (model == "halfline") {
        cr = halfline_commutator_identity(n1);
    } else if (model == "funnel" || cfg.geometry.kind == GeometryKind::half_ray_funnel) {
        int from = cfg.command_params.value("interior_from", 25);
        int buffer = cfg.command_params.value("edge_buffer", 20);
        cr = funnel_commutator_identity(n1, cfg.geometry.fiber, from, buffer);
        default_tol = 1e-8;
    } else if (model == "cusp" || cfg.geometry.kind == GeometryKind::half_ray_cusp) {
        cr = cusp_commutator_identity(n1, cfg.geometry.fiber);
    } else {
        throw InvalidArgument(
            "commutator-check: set command_params.model to halfline | funnel | cusp");
    }
    double tol = cfg.command_params.value("tolerance", default_tol);
    rep.results["max_interior_deviation"] = cr.max_interior_deviation;
    rep.results["support_box"] = cr.support_box;
    if (cr.he_block_norm >= 0.0) rep.results["he_block_norm"] = cr.he_block_norm;
    if (cr.closed_form_deviation >= 0.0)
        rep.results["closed_form_deviation"] = cr.closed_form_deviation;
    rep.results["witness_valid"] = cr.witness_valid;
    rep.add_verdict("interior_identity", cr.max_interior_deviation <= tol, tol,
                    "max residual outside the finite-rank box and truncation band");
    if (cr.witness_valid)
        rep.add_verdict("remainder_compact", cr.witness.witnessed_compact, cr.witness.tol,
                        "tail norms of the finite-rank remainder");
    CsvSeries s;
    s.filename = "commutator_tail.csv";
    s.columns = {"level", "residual_norm"};
    for (size_t i = 0; i < cr.tail_profile.size(); ++i)
        s.add_row({std::to_string(i), format_float(cr.tail_profile[i])});
    rep.series.push_back(s);
}

inline void run_mourre_scan(const ExperimentConfig& cfg, Report& rep) {
    const Json& p = cfg.command_params;
    require(p.contains("window"), "mourre-scan: command_params.window = [a, b] required");
    SpectralWindow window{p.at("window").at(0).get<double>(), p.at("window").at(1).get<double>()};
    double c = p.value("c", 0.0);
    require(c > 0.0, "mourre-scan: command_params.c > 0 required");
    double tau = p.value("tau", -1.0);
    std::vector<int> truncations = p.contains("truncations")
                                       ? int_list(p.at("truncations"), "truncations")
                                       : std::vector<int>{cfg.geometry.ray_length};
    const double m2 = cfg.geometry.fiber.m2;
    CsvSeries s;
    s.filename = "mourre_counts.csv";
    s.columns = {"N1", "window_rank", "negative_count", "tau"};
    std::vector<int> counts;
    bool out_of_band = false;
    for (int n1 : truncations) {
        GeometrySpec spec = cfg.geometry;
        spec.ray_length = n1;
        WeightedGraph g = build_geometry(spec);
        OperatorMatrix h = assemble_hamiltonian(g, cfg);
        if (cfg.has_perturbation) require_radial_on_cusp(cfg.perturbation, g);
        ConjugateBundle bundle = conjugate_for(spec);
        MourreScanResult res = mourre_scan(h, bundle.A, window, c, m2, tau);
        counts.push_back(res.negative_count);
        out_of_band = out_of_band || res.out_of_band;
        s.add_row({std::to_string(n1), std::to_string(res.window_rank),
                   std::to_string(res.negative_count), format_float(res.tau)});
    }
    rep.series.push_back(s);
    rep.results["negative_counts"] = counts;
    rep.results["out_of_band"] = out_of_band;
    rep.add_verdict("window_in_band", !out_of_band, 0.0,
                    "window must avoid [alpha/m2, beta/m2] endpoints");
    if (counts.size() >= 2) {
        bool stable = true;
        for (size_t i = 1; i < counts.size(); ++i) stable = stable && counts[i] == counts[0];
        rep.add_verdict("counts_stable", stable, 0.0,
                        "negative-eigenvalue counts equal across truncations");
    }
}

inline void run_lap_scan(const ExperimentConfig& cfg, Report& rep) {
    const Json& p = cfg.command_params;
    require(!cfg.has_perturbation,
            "lap-scan: the large-N normalized assembly supports the free model only");
    require(cfg.geometry.kind == GeometryKind::glued && cfg.geometry.fiber.p == 1,
            "lap-scan: glued geometry with a single-vertex fiber required");
    LapScanConfig sc;
    sc.lambdas = double_list(detail::expect(p, "lambdas", "command_params."), "lambdas");
    sc.rhos = double_list(detail::expect(p, "rhos", "command_params."), "rhos");
    sc.s = p.value("s", 1.0);
    sc.truncations = int_list(detail::expect(p, "truncations", "command_params."), "truncations");
    sc.convergence_tol = p.value("convergence_tol", 0.05);
    sc.threshold_margin = p.value("threshold_margin", 0.05);
    sc.m2 = cfg.geometry.fiber.m2;
    sc.seed = cfg.seed;
    double glue = cfg.geometry.gluing.empty() ? 1.0 : cfg.geometry.gluing[0].weight;
    double s_exp = sc.s;
    LapModelBuilder builder = [glue, s_exp](int n1) {
        NormalizedModel nm = normalized_glued_ray(n1, glue);
        LapModel m;
        m.h = nm.h;
        m.weight = assemble_lambda_weight(nm.frame, s_exp);
        return m;
    };
    LapScanReport scan = lap_scan(builder, sc);
    CsvSeries s;
    s.filename = "lap_norms.csv";
    s.columns = {"lambda", "rho", "N1_used", "norm", "verdict"};
    for (const auto& cell : scan.cells)
        s.add_row({format_float(cell.lambda), format_float(cell.rho),
                   std::to_string(cell.n1_used), format_float(cell.norm),
                   cell.resolved ? lap_verdict_name(scan.verdicts.at(cell.lambda))
                                 : "unresolved"});
    rep.series.push_back(s);
    Json verdicts = Json::object();
    for (const auto& [lambda, v] : scan.verdicts)
        verdicts[format_float(lambda)] = lap_verdict_name(v);
    rep.results["verdicts"] = verdicts;
    rep.add_verdict("all_cells_resolved", scan.all_resolved, sc.convergence_tol,
                    "every (lambda, rho) cell converged in N1");
    if (p.contains("expected")) {
        bool match = true;
        for (const auto& [key, val] : p.at("expected").items()) {
            double lambda = std::stod(key);
            auto it = scan.verdicts.lower_bound(lambda - 1e-12);
            match = match && it != scan.verdicts.end() &&
                    std::string(lap_verdict_name(it->second)) == val.get<std::string>();
        }
        rep.add_verdict("expected_verdicts", match, 0.0,
                        "per-lambda verdicts match command_params.expected");
    }
}

inline void run_evolve(const ExperimentConfig& cfg, Report& rep) {
    const Json& p = cfg.command_params;
    require(p.contains("window"), "evolve: command_params.window = [a, b] required");
    SpectralWindow window{p.at("window").at(0).get<double>(), p.at("window").at(1).get<double>()};
    double s_exp = p.value("s", 1.0);
    double horizon = p.value("horizon", 50.0);
    double dt = p.value("dt", 0.1);
    double stability_tol = p.value("stability_tol", 0.15);
    std::vector<int> truncations = p.contains("truncations")
                                       ? int_list(p.at("truncations"), "truncations")
                                       : std::vector<int>{cfg.geometry.ray_length};
    CsvSeries s;
    s.filename = "propagation.csv";
    s.columns = {"N1", "ratio"};
    std::vector<double> ratios;
    for (int n1 : truncations) {
        GeometrySpec spec = cfg.geometry;
        spec.ray_length = n1;
        WeightedGraph g = build_geometry(spec);
        OperatorMatrix h = assemble_hamiltonian(g, cfg);
        require(h.dim <= cfg.max_dim, "evolve: dimension exceeds --max-dim");
        EigenDecomposition eig = eigendecompose(h, cfg.max_dim);
        OperatorMatrix lw = assemble_lambda_weight(g, s_exp);
        RealVector w(h.dim);
        for (int i = 0; i < h.dim; ++i) w(i) = lw.entries.coeff(i, i).real();
        int source = p.value("source_vertex", 0);
        require(source >= 0 && source < h.dim, "evolve: source vertex out of range");
        ComplexVector f = ComplexVector::Zero(h.dim);
        f(source) = 1.0;
        double f2 = g.m(source);  // ||delta||^2 in l^2(m)
        double integral = propagation_integral(eig, w, window, f, horizon, dt);
        ratios.push_back(integral / f2);
        s.add_row({std::to_string(n1), format_float(ratios.back())});
    }
    rep.series.push_back(s);
    rep.results["ratios"] = ratios;
    bool stable = true;
    for (size_t i = 1; i < ratios.size(); ++i)
        stable = stable && std::abs(ratios[i] - ratios[i - 1]) <= stability_tol *
                                                                      std::abs(ratios[i - 1]);
    rep.add_verdict("ratio_stable", stable, stability_tol,
                    "propagation ratio stable across truncations");
}

inline void run_threshold_study(const ExperimentConfig& cfg, Report& rep) {
    const Json& p = cfg.command_params;
    require(p.contains("window"), "threshold-study: command_params.window = [a, b] required");
    SpectralWindow window{p.at("window").at(0).get<double>(), p.at("window").at(1).get<double>()};
    double band_margin = p.value("band_margin", 0.05);
    std::vector<int> truncations =
        int_list(detail::expect(p, "truncations", "command_params."), "truncations");
    const ExperimentConfig* cfg_ptr = &cfg;
    auto builder = [cfg_ptr](int n1) {
        GeometrySpec spec = cfg_ptr->geometry;
        spec.ray_length = n1;
        WeightedGraph g = build_geometry(spec);
        return assemble_hamiltonian(g, *cfg_ptr);
    };
    ThresholdReport tr =
        threshold_study(builder, window, band_margin, truncations, cfg.geometry.fiber.m2);
    CsvSeries s;
    s.filename = "counts.csv";
    s.columns = {"N1", "interior_count", "near_alpha_count", "near_beta_count"};
    for (const auto& c : tr.counts)
        s.add_row({std::to_string(c.n1), std::to_string(c.interior),
                   std::to_string(c.near_alpha), std::to_string(c.near_beta)});
    rep.series.push_back(s);
    rep.add_verdict("interior_counts_stable", tr.interior_stable, 0.0,
                    "interior counts equal at the top two truncations");
}

inline void run_conditions_check(const ExperimentConfig& cfg, Report& rep) {
    WeightedGraph g = build_geometry(cfg.geometry);
    HypothesisReport h0 = check_H0(cfg.perturbation, g);
    HypothesisReport h123 =
        check_H123(cfg.perturbation, g, cfg.perturbation.declared_eps_exponent);
    bool radial = is_radial(cfg.perturbation, g);
    auto profile = [](const DecayProfile& pr) {
        Json j;
        j["global_sup"] = pr.global_sup;
        j["tail_sup"] = pr.tail_sup;
        j["tolerance"] = pr.tolerance;
        j["pass"] = pr.pass;
        return j;
    };
    rep.results["H0"] = {{"v", profile(h0.v_profile)},
                         {"mu", profile(h0.mu_profile)},
                         {"eps", profile(h0.eps_profile)}};
    rep.results["H123"] = {{"v", profile(h123.v_profile)},
                           {"mu", profile(h123.mu_profile)},
                           {"eps", profile(h123.eps_profile)}};
    rep.results["radial_on_cusp"] = radial;
    rep.add_verdict("H0_decay", h0.pass, 0.0, "fields vanish at infinity (tail extrapolation)");
    rep.add_verdict("H123_weighted_differences", h123.pass,
                    cfg.perturbation.declared_eps_exponent,
                    "weighted difference profiles decay at the declared exponent");
    bool has_cusp = cfg.geometry.kind == GeometryKind::half_ray_cusp ||
                    cfg.geometry.kind == GeometryKind::z_model ||
                    cfg.geometry.kind == GeometryKind::glued;
    if (has_cusp)
        rep.add_verdict("radial_on_cusp", radial, 0.0,
                        "V, eps, and mu are radial on the cusp block");
}

}  // namespace detail

/// Dispatch one experiment; throws InvalidArgument on any config problem.
inline Report run_experiment(const ExperimentConfig& cfg) {
    Report rep;
    rep.config_echo = cfg.echo;
    if (cfg.command == "build")
        detail::run_build(cfg, rep);
    else if (cfg.command == "spectrum")
        detail::run_spectrum(cfg, rep);
    else if (cfg.command == "commutator-check")
        detail::run_commutator_check(cfg, rep);
    else if (cfg.command == "mourre-scan")
        detail::run_mourre_scan(cfg, rep);
    else if (cfg.command == "lap-scan")
        detail::run_lap_scan(cfg, rep);
    else if (cfg.command == "evolve")
        detail::run_evolve(cfg, rep);
    else if (cfg.command == "threshold-study")
        detail::run_threshold_study(cfg, rep);
    else if (cfg.command == "conditions-check")
        detail::run_conditions_check(cfg, rep);
    else
        throw InvalidArgument("unknown command: " + cfg.command);
    return rep;
}

}  // namespace cusplab
