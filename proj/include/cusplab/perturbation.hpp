#pragma once

// Perturbation triples (mu, eps, V), the decay hypotheses they must satisfy,
// and radiality on the cusp.

#include <cmath>
#include <functional>
#include <map>
#include <memory>

#include "cusplab/graph.hpp"
#include "cusplab/types.hpp"

namespace cusplab {

enum class PerturbationKind { mu, eps, V };

/// Evaluable perturbation triple with its declared decay data.
struct PerturbationSpec {
    using VertexFn = std::function<double(const VertexLabel&)>;
    using EdgeFn = std::function<double(const VertexLabel&, const VertexLabel&)>;

    VertexFn mu = [](const VertexLabel&) { return 0.0; };
    EdgeFn eps = [](const VertexLabel&, const VertexLabel&) { return 0.0; };
    VertexFn V = [](const VertexLabel&) { return 0.0; };

    /// epsilon-hat: the declared exponent in the weighted-difference bounds.
    double declared_eps_exponent = 0.5;
    /// Declared power-decay rates of the fields themselves, used only to
    /// extrapolate tail tolerances in the H0 check.
    double declared_mu_decay = 1.0;
    double declared_edge_decay = 1.0;
    double declared_v_decay = 1.0;
    bool radial_on_cusp = true;

    double mu_at(const VertexLabel& l) const { return mu(l); }
    double v_at(const VertexLabel& l) const { return V(l); }
    double eps_at(const VertexLabel& a, const VertexLabel& b) const { return eps(a, b); }

    static PerturbationSpec zero() { return {}; }
};

/// Radial ray coordinate of a vertex; compact-part vertices sit at 0.
inline int ray_coordinate(const VertexLabel& l) {
    return l.block == Block::compact ? 0 : std::abs(l.level);
}

/// Edge coordinate: the smaller ray coordinate of the two endpoints.
inline int edge_coordinate(const VertexLabel& a, const VertexLabel& b) {
    return std::min(ray_coordinate(a), ray_coordinate(b));
}

/// amplitude / <x1>^exponent, radial by construction.
inline PerturbationSpec::VertexFn make_power_decay(PerturbationKind kind, double amplitude,
                                                   double exponent) {
    if (kind != PerturbationKind::V)
        require(amplitude > -1.0, "power decay: mu/eps amplitude must stay above -1");
    return [amplitude, exponent](const VertexLabel& l) {
        return amplitude / std::pow(bracket(double(ray_coordinate(l))), exponent);
    };
}

inline PerturbationSpec::EdgeFn make_power_decay_edge(double amplitude, double exponent) {
    require(amplitude > -1.0, "power decay: eps amplitude must stay above -1");
    return [amplitude, exponent](const VertexLabel& a, const VertexLabel& b) {
        return amplitude / std::pow(bracket(double(edge_coordinate(a, b))), exponent);
    };
}

/// amplitude (-1)^n / <n>^exponent -- violates the difference bounds for
/// small exponents.
inline PerturbationSpec::VertexFn make_alternating(double amplitude, double exponent) {
    return [amplitude, exponent](const VertexLabel& l) {
        int n = ray_coordinate(l);
        double sign = (n % 2 == 0) ? 1.0 : -1.0;
        return sign * amplitude / std::pow(bracket(double(n)), exponent);
    };
}

inline PerturbationSpec::VertexFn make_constant(double value) {
    return [value](const VertexLabel&) { return value; };
}

/// Radial power-decay triple with shared exponent.
inline PerturbationSpec make_power_decay_triple(double mu_amp, double eps_amp, double v_amp,
                                                double exponent, double eps_hat = 0.5) {
    PerturbationSpec p;
    p.mu = make_power_decay(PerturbationKind::mu, mu_amp, exponent);
    p.eps = make_power_decay_edge(eps_amp, exponent);
    p.V = make_power_decay(PerturbationKind::V, v_amp, exponent);
    p.declared_eps_exponent = eps_hat;
    p.declared_mu_decay = exponent;
    p.declared_edge_decay = exponent;
    p.declared_v_decay = exponent;
    return p;
}

struct DecayProfile {
    std::vector<double> levels;  // |x1|
    std::vector<double> values;  // fiber max at that coordinate
    double tail_sup = 0.0;       // over the last quarter of levels
    double global_sup = 0.0;
    double tolerance = 0.0;
    bool pass = true;
};

struct HypothesisReport {
    DecayProfile v_profile, mu_profile, eps_profile;
    bool pass = true;
};

namespace detail {

// Group vertex indices by ray coordinate.
inline std::map<int, std::vector<int>> by_coordinate(const WeightedGraph& g) {
    std::map<int, std::vector<int>> groups;
    for (int x = 0; x < g.vertex_count; ++x)
        if (g.labels[x].block != Block::compact)
            groups[ray_coordinate(g.labels[x])].push_back(x);
    return groups;
}

inline DecayProfile finish_profile(DecayProfile prof, double declared_decay) {
    const int L = int(prof.values.size());
    if (L == 0) return prof;
    prof.global_sup = *std::max_element(prof.values.begin(), prof.values.end());
    const int tail_start = 3 * L / 4;
    for (int i = tail_start; i < L; ++i) prof.tail_sup = std::max(prof.tail_sup, prof.values[i]);
    // Tolerance: 10x the value the declared power decay predicts at the tail.
    double extrapolated =
        prof.global_sup * std::pow(bracket(prof.levels.empty() ? 0.0 : prof.levels[0]) /
                                       bracket(prof.levels[tail_start]),
                                   declared_decay);
    prof.tolerance = 10.0 * extrapolated;
    prof.pass = prof.tail_sup <= std::max(prof.tolerance, 1e-12);
    return prof;
}

}  // namespace detail

/// (H0): fiber-max profiles of |V|, |mu|, |eps| must vanish along the ray.
inline HypothesisReport check_H0(const PerturbationSpec& pert, const WeightedGraph& g) {
    require(!g.labels.empty(), "check_H0: labeled graph required");
    auto groups = detail::by_coordinate(g);
    HypothesisReport rep;
    for (const auto& [coord, idx] : groups) {
        double vmax = 0.0, mumax = 0.0, epsmax = 0.0;
        for (int x : idx) {
            vmax = std::max(vmax, std::abs(pert.v_at(g.labels[x])));
            mumax = std::max(mumax, std::abs(pert.mu_at(g.labels[x])));
            for (SparseRealMatrix::InnerIterator it(g.edges, x); it; ++it)
                epsmax = std::max(epsmax,
                                  std::abs(pert.eps_at(g.labels[x], g.labels[it.row()])));
        }
        rep.v_profile.levels.push_back(coord);
        rep.v_profile.values.push_back(vmax);
        rep.mu_profile.levels.push_back(coord);
        rep.mu_profile.values.push_back(mumax);
        rep.eps_profile.levels.push_back(coord);
        rep.eps_profile.values.push_back(epsmax);
    }
    rep.v_profile = detail::finish_profile(rep.v_profile, pert.declared_v_decay);
    rep.mu_profile = detail::finish_profile(rep.mu_profile, pert.declared_mu_decay);
    rep.eps_profile = detail::finish_profile(rep.eps_profile, pert.declared_edge_decay);
    rep.pass = rep.v_profile.pass && rep.mu_profile.pass && rep.eps_profile.pass;
    return rep;
}

/// (H1)-(H3): weighted first differences <n>^{1+eps_hat} |d f(n)| must stay
/// bounded; the finite-grid proxy requires the sup to be attained before the
/// last quarter of levels.
inline HypothesisReport check_H123(const PerturbationSpec& pert, const WeightedGraph& g,
                                   double eps_hat) {
    require(eps_hat > 0.0, "check_H123: exponent must be positive");
    require(!g.labels.empty(), "check_H123: labeled graph required");
    auto groups = detail::by_coordinate(g);
    HypothesisReport rep;
    auto weighted_diff_profile = [&](auto value_at_vertex, auto diff_eps) {
        DecayProfile prof;
        for (const auto& [coord, idx] : groups) {
            if (coord == 0) continue;  // differences need both neighbors
            auto prev = groups.find(coord - 1);
            auto next = groups.find(coord + 1);
            if (prev == groups.end()) continue;
            double w = std::pow(bracket(double(coord)), 1.0 + eps_hat);
            double dmax = 0.0;
            for (int x : idx) {
                const VertexLabel& lx = g.labels[x];
                VertexLabel lprev = lx;
                lprev.level = (lx.level > 0) ? lx.level - 1 : lx.level + 1;
                if (diff_eps) {
                    if (next == groups.end()) continue;
                    VertexLabel lnext = lx;
                    lnext.level = (lx.level > 0) ? lx.level + 1 : lx.level - 1;
                    double d = pert.eps_at(lx, lnext) - pert.eps_at(lprev, lx);
                    dmax = std::max(dmax, std::abs(d));
                } else {
                    double d = value_at_vertex(lprev) - value_at_vertex(lx);
                    dmax = std::max(dmax, std::abs(d));
                }
            }
            prof.levels.push_back(coord);
            prof.values.push_back(w * dmax);
        }
        const int L = int(prof.values.size());
        if (L == 0) return prof;
        prof.global_sup = *std::max_element(prof.values.begin(), prof.values.end());
        int argmax = int(std::max_element(prof.values.begin(), prof.values.end()) -
                         prof.values.begin());
        const int tail_start = 3 * L / 4;
        for (int i = tail_start; i < L; ++i)
            prof.tail_sup = std::max(prof.tail_sup, prof.values[i]);
        prof.pass = (prof.global_sup == 0.0) || (argmax < tail_start);
        return prof;
    };
    rep.v_profile = weighted_diff_profile(
        [&](const VertexLabel& l) { return pert.v_at(l); }, false);
    rep.mu_profile = weighted_diff_profile(
        [&](const VertexLabel& l) { return pert.mu_at(l); }, false);
    rep.eps_profile = weighted_diff_profile(
        [&](const VertexLabel& l) { return 0.0; }, true);
    rep.pass = rep.v_profile.pass && rep.mu_profile.pass && rep.eps_profile.pass;
    return rep;
}

/// True iff mu, V, and the ray-direction eps are constant along each fiber.
inline bool is_radial(const PerturbationSpec& pert, const WeightedGraph& g) {
    require(!g.labels.empty(), "is_radial: labeled graph required");
    auto groups = detail::by_coordinate(g);
    for (const auto& [coord, idx] : groups) {
        (void)coord;
        const VertexLabel& ref = g.labels[idx.front()];
        VertexLabel ref_next = ref;
        ref_next.level = (ref.level >= 0) ? ref.level + 1 : ref.level - 1;
        double eps_ref = pert.eps_at(ref, ref_next);
        for (int x : idx) {
            const VertexLabel& l = g.labels[x];
            if (pert.mu_at(l) != pert.mu_at(ref)) return false;
            if (pert.v_at(l) != pert.v_at(ref)) return false;
            VertexLabel lnext = l;
            lnext.level = (l.level >= 0) ? l.level + 1 : l.level - 1;
            if (pert.eps_at(l, lnext) != eps_ref) return false;
        }
    }
    return true;
}

/// Fiber-averaged (hence radial) copy of a perturbation, table-backed.
inline PerturbationSpec fiber_average(const PerturbationSpec& pert, const WeightedGraph& g) {
    auto groups = detail::by_coordinate(g);
    auto mu_tab = std::make_shared<std::map<int, double>>();
    auto v_tab = std::make_shared<std::map<int, double>>();
    auto eps_tab = std::make_shared<std::map<int, double>>();
    for (const auto& [coord, idx] : groups) {
        double mu_sum = 0.0, v_sum = 0.0, eps_sum = 0.0;
        for (int x : idx) {
            const VertexLabel& l = g.labels[x];
            mu_sum += pert.mu_at(l);
            v_sum += pert.v_at(l);
            VertexLabel lnext = l;
            lnext.level = (l.level >= 0) ? l.level + 1 : l.level - 1;
            eps_sum += pert.eps_at(l, lnext);
        }
        (*mu_tab)[coord] = mu_sum / double(idx.size());
        (*v_tab)[coord] = v_sum / double(idx.size());
        (*eps_tab)[coord] = eps_sum / double(idx.size());
    }
    auto lookup = [](const std::shared_ptr<std::map<int, double>>& tab, int c) {
        auto it = tab->find(c);
        if (it != tab->end()) return it->second;
        return tab->empty() ? 0.0 : tab->rbegin()->second;
    };
    PerturbationSpec out = pert;
    out.mu = [mu_tab, lookup](const VertexLabel& l) { return lookup(mu_tab, ray_coordinate(l)); };
    out.V = [v_tab, lookup](const VertexLabel& l) { return lookup(v_tab, ray_coordinate(l)); };
    out.eps = [eps_tab, lookup](const VertexLabel& a, const VertexLabel& b) {
        return lookup(eps_tab, edge_coordinate(a, b));
    };
    out.radial_on_cusp = true;
    return out;
}

/// Cusp runs require radial data; reject otherwise with a diagnostic.
inline void require_radial_on_cusp(const PerturbationSpec& pert, const WeightedGraph& g) {
    bool has_cusp = false;
    for (const auto& l : g.labels)
        if (l.block == Block::cusp) { has_cusp = true; break; }
    if (!has_cusp) return;
    require(is_radial(pert, g),
            "perturbation must be radial on the cusp (V, eps, and mu constant on fibers)");
}

}  // namespace cusplab
