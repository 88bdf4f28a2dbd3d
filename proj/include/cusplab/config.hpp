#pragma once

// JSON experiment configs: schema validation, defaults, and the resolved
// echo that goes into every report.

#include <cstdint>
#include <fstream>
#include <string>

#include <json.hpp>

#include "cusplab/graph.hpp"
#include "cusplab/perturbation.hpp"

namespace cusplab {

using Json = nlohmann::ordered_json;

/// Everything a single batch run needs.  The echo member is the fully
/// resolved config (defaults filled in) and is what reports embed.
struct ExperimentConfig {
    GeometrySpec geometry;
    PerturbationSpec perturbation;
    bool has_perturbation = false;
    std::string command;
    Json command_params = Json::object();
    std::string output = "out";
    std::uint64_t seed = 12345;
    int max_dim = 6000;
    Json echo;
};

namespace detail {

[[noreturn]] inline void config_error(const std::string& path, const std::string& what) {
    throw InvalidArgument("config field '" + path + "': " + what);
}

inline const Json& expect(const Json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) config_error(path + key, "missing");
    return j.at(key);
}

inline double number(const Json& j, const std::string& path) {
    if (!j.is_number()) config_error(path, "expected a number");
    return j.get<double>();
}

inline int integer(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) config_error(path, "expected an integer");
    return j.get<int>();
}

inline FiniteGraphSpec parse_fiber(const Json& j) {
    if (j.is_null()) return FiniteGraphSpec::single_vertex();
    std::string type = j.value("type", "single");
    int p = j.value("p", 1);
    double m2 = j.value("m2", 1.0);
    double w = j.value("weight", 1.0);
    FiniteGraphSpec fib;
    if (type == "single")
        fib = FiniteGraphSpec::single_vertex(m2);
    else if (type == "cycle")
        fib = FiniteGraphSpec::cycle(p, m2, w);
    else if (type == "path")
        fib = FiniteGraphSpec::path(p, m2, w);
    else if (type == "edgeless")
        fib = FiniteGraphSpec::edgeless(p, m2);
    else if (type == "custom") {
        fib.p = p;
        fib.m2 = m2;
        for (const auto& e : j.value("edges", Json::array()))
            fib.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>());
    } else
        config_error("geometry.fiber.type", "unknown fiber type '" + type + "'");
    fib.validate();
    return fib;
}

inline GluingEndpoint parse_endpoint(const Json& j) {
    GluingEndpoint e;
    std::string b = expect(j, "block", "geometry.gluing.").get<std::string>();
    if (b == "funnel")
        e.block = Block::funnel;
    else if (b == "cusp")
        e.block = Block::cusp;
    else if (b == "compact")
        e.block = Block::compact;
    else
        config_error("geometry.gluing.block", "expected funnel | cusp | compact");
    e.index = j.value("index", 0);
    e.level = 0;
    return e;
}

inline GeometrySpec parse_geometry(const Json& j) {
    GeometrySpec spec;
    std::string kind = expect(j, "kind", "geometry.").get<std::string>();
    if (kind == "cusp")
        spec.kind = GeometryKind::half_ray_cusp;
    else if (kind == "funnel")
        spec.kind = GeometryKind::half_ray_funnel;
    else if (kind == "z")
        spec.kind = GeometryKind::z_model;
    else if (kind == "glued")
        spec.kind = GeometryKind::glued;
    else
        config_error("geometry.kind", "expected cusp | funnel | z | glued");
    spec.ray_length = integer(expect(j, "ray_length", "geometry."), "geometry.ray_length");
    spec.fiber = parse_fiber(j.value("fiber", Json()));
    std::string prod = j.value("product", "twisted");
    if (prod == "twisted")
        spec.product = ProductKind::twisted;
    else if (prod == "cartesian")
        spec.product = ProductKind::cartesian;
    else
        config_error("geometry.product", "expected twisted | cartesian");
    if (j.contains("compact_part")) {
        const Json& c = j.at("compact_part");
        for (const auto& m : c.value("m", Json::array()))
            spec.compact_part.m.push_back(m.get<double>());
        for (const auto& e : c.value("edges", Json::array()))
            spec.compact_part.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>(),
                                                 e.at(2).get<double>());
    }
    for (const auto& g : j.value("gluing", Json::array())) {
        GluingEdge edge;
        edge.a = parse_endpoint(expect(g, "a", "geometry.gluing."));
        edge.b = parse_endpoint(expect(g, "b", "geometry.gluing."));
        edge.weight = g.value("weight", 1.0);
        spec.gluing.push_back(edge);
    }
    return spec;
}

inline PerturbationSpec::VertexFn parse_vertex_field(const Json& j, PerturbationKind kind,
                                                     const std::string& path) {
    std::string family = j.value("family", "none");
    if (family == "none") return [](const VertexLabel&) { return 0.0; };
    if (family == "power")
        return make_power_decay(kind, number(expect(j, "amplitude", path), path + "amplitude"),
                                j.value("exponent", 1.0));
    if (family == "alternating")
        return make_alternating(number(expect(j, "amplitude", path), path + "amplitude"),
                                j.value("exponent", 1.0));
    if (family == "constant")
        return make_constant(number(expect(j, "value", path), path + "value"));
    if (family == "table") {
        std::vector<double> values;
        for (const auto& v : expect(j, "values", path)) values.push_back(v.get<double>());
        if (values.empty()) config_error(path + "values", "empty table");
        return [values](const VertexLabel& l) {
            int n = ray_coordinate(l);
            return values[std::min<size_t>(size_t(n), values.size() - 1)];
        };
    }
    config_error(path + "family", "expected none | power | alternating | constant | table");
}

inline PerturbationSpec::EdgeFn parse_edge_field(const Json& j, const std::string& path) {
    std::string family = j.value("family", "none");
    if (family == "none") return [](const VertexLabel&, const VertexLabel&) { return 0.0; };
    if (family == "power")
        return make_power_decay_edge(number(expect(j, "amplitude", path), path + "amplitude"),
                                     j.value("exponent", 1.0));
    if (family == "constant") {
        double v = number(expect(j, "value", path), path + "value");
        return [v](const VertexLabel&, const VertexLabel&) { return v; };
    }
    if (family == "table") {
        std::vector<double> values;
        for (const auto& v : expect(j, "values", path)) values.push_back(v.get<double>());
        if (values.empty()) config_error(path + "values", "empty table");
        return [values](const VertexLabel& a, const VertexLabel& b) {
            int n = edge_coordinate(a, b);
            return values[std::min<size_t>(size_t(n), values.size() - 1)];
        };
    }
    config_error(path + "family", "expected none | power | constant | table");
}

inline PerturbationSpec parse_perturbation(const Json& j, bool& present) {
    PerturbationSpec pert;
    present = false;
    if (j.is_null()) return pert;
    auto field = [&](const char* key) { return j.value(key, Json::object()); };
    Json mu = field("mu"), eps = field("eps"), v = field("v");
    present = mu.value("family", "none") != "none" || eps.value("family", "none") != "none" ||
              v.value("family", "none") != "none";
    pert.mu = parse_vertex_field(mu, PerturbationKind::mu, "perturbation.mu.");
    pert.eps = parse_edge_field(eps, "perturbation.eps.");
    pert.V = parse_vertex_field(v, PerturbationKind::V, "perturbation.v.");
    pert.declared_eps_exponent = j.value("eps_hat", 0.5);
    pert.declared_mu_decay = mu.value("exponent", 1.0);
    pert.declared_edge_decay = eps.value("exponent", 1.0);
    pert.declared_v_decay = v.value("exponent", 1.0);
    pert.radial_on_cusp = j.value("radial_on_cusp", true);
    return pert;
}

/// Echo of the geometry with every default made explicit.
inline Json echo_geometry(const GeometrySpec& s) {
    Json j;
    switch (s.kind) {
        case GeometryKind::half_ray_cusp: j["kind"] = "cusp"; break;
        case GeometryKind::half_ray_funnel: j["kind"] = "funnel"; break;
        case GeometryKind::z_model: j["kind"] = "z"; break;
        case GeometryKind::glued: j["kind"] = "glued"; break;
    }
    j["ray_length"] = s.ray_length;
    Json fib;
    fib["type"] = "custom";
    fib["p"] = s.fiber.p;
    fib["m2"] = s.fiber.m2;
    fib["edges"] = Json::array();
    for (const auto& [a, b, w] : s.fiber.edges) fib["edges"].push_back({a, b, w});
    j["fiber"] = fib;
    j["product"] = s.product == ProductKind::twisted ? "twisted" : "cartesian";
    Json cp;
    cp["m"] = s.compact_part.m;
    cp["edges"] = Json::array();
    for (const auto& [a, b, w] : s.compact_part.edges) cp["edges"].push_back({a, b, w});
    j["compact_part"] = cp;
    j["gluing"] = Json::array();
    auto block_name = [](Block b) {
        return b == Block::funnel ? "funnel" : b == Block::cusp ? "cusp" : "compact";
    };
    for (const auto& g : s.gluing) {
        Json e;
        e["a"] = {{"block", block_name(g.a.block)}, {"index", g.a.index}};
        e["b"] = {{"block", block_name(g.b.block)}, {"index", g.b.index}};
        e["weight"] = g.weight;
        j["gluing"].push_back(e);
    }
    return j;
}

inline Json echo_field(const Json& j, bool edge_field) {
    Json out;
    std::string family = j.value("family", "none");
    out["family"] = family;
    if (family == "power" || family == "alternating") {
        out["amplitude"] = j.value("amplitude", 0.0);
        out["exponent"] = j.value("exponent", 1.0);
    } else if (family == "constant") {
        out["value"] = j.value("value", 0.0);
    } else if (family == "table") {
        out["values"] = j.value("values", Json::array());
    }
    (void)edge_field;
    return out;
}

}  // namespace detail

inline ExperimentConfig parse_config(const Json& j) {
    ExperimentConfig cfg;
    cfg.geometry = detail::parse_geometry(detail::expect(j, "geometry", ""));
    cfg.perturbation =
        detail::parse_perturbation(j.value("perturbation", Json()), cfg.has_perturbation);
    cfg.command = detail::expect(j, "command", "").get<std::string>();
    static const char* known[] = {"build",    "spectrum", "commutator-check",
                                  "mourre-scan", "lap-scan", "evolve",
                                  "threshold-study", "conditions-check"};
    bool ok = false;
    for (const char* k : known) ok = ok || cfg.command == k;
    if (!ok) detail::config_error("command", "unknown command '" + cfg.command + "'");
    cfg.command_params = j.value("command_params", Json::object());
    cfg.output = j.value("output", "out");
    cfg.seed = j.value("seed", std::uint64_t(12345));
    cfg.max_dim = j.value("max_dim", 6000);

    cfg.echo["geometry"] = detail::echo_geometry(cfg.geometry);
    Json pj = j.value("perturbation", Json::object());
    Json pe;
    pe["mu"] = detail::echo_field(pj.value("mu", Json::object()), false);
    pe["eps"] = detail::echo_field(pj.value("eps", Json::object()), true);
    pe["v"] = detail::echo_field(pj.value("v", Json::object()), false);
    pe["eps_hat"] = cfg.perturbation.declared_eps_exponent;
    pe["radial_on_cusp"] = cfg.perturbation.radial_on_cusp;
    cfg.echo["perturbation"] = pe;
    cfg.echo["command"] = cfg.command;
    cfg.echo["command_params"] = cfg.command_params;
    cfg.echo["output"] = cfg.output;
    cfg.echo["seed"] = cfg.seed;
    cfg.echo["max_dim"] = cfg.max_dim;
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "config file not readable: " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

}  // namespace cusplab
