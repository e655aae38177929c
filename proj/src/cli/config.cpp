#include "levyflow/cli.hpp"

#include "levyflow/drift.hpp"
#include "levyflow/semigroup.hpp"
#include "levyflow/zvonkin.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace levyflow::cli {

using nlohmann::json;

namespace {

json stable_model(double alpha) {
    return {{"class", "IsotropicStable"}, {"dimension", 1}, {"alpha", alpha}, {"scale", json::array({1.0})}};
}

json holder_drift(double beta) {
    return {{"family", "HolderPower"}, {"dimension", 1}, {"beta", beta}, {"kappa", 1.0}, {"bound", 1.0}};
}

json path_setup(const std::string& scheme) { return {{"eps_cut", 0.01}, {"scheme", scheme}}; }

json transform_block() {
    TransformOptions t;
    return {{"options", resolvent_options_to_json(t.resolvent)}, {"lambda_schedule", t.lambda_schedule}, {"r", 1.0}};
}

// Objects replaced wholesale and validated by their own parsers.
const std::set<std::string> kOpaque{"model", "drift", "f"};

bool same_kind(const json& def, const json& v) {
    if (def.is_null()) return true;
    if (def.is_number_unsigned()) return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
    if (def.is_number_integer()) return v.is_number_integer();
    if (def.is_number()) return v.is_number();
    return def.type() == v.type();
}

json merge(const json& def, const json& raw, const std::string& where) {
    json out = def;
    for (auto it = raw.begin(); it != raw.end(); ++it) {
        const std::string key = where.empty() ? it.key() : where + "." + it.key();
        if (!def.contains(it.key())) throw DomainError("unknown config key: " + key);
        const json& d = def[it.key()];
        if (!same_kind(d, it.value())) throw DomainError("config key " + key + " has the wrong type");
        if (d.is_object() && !kOpaque.count(it.key())) out[it.key()] = merge(d, it.value(), key);
        else out[it.key()] = it.value();
    }
    return out;
}

template <class F>
void with_context(const std::string& what, F&& f) {
    try {
        f();
    } catch (const std::exception& e) {
        throw DomainError("in " + what + ": " + e.what());
    }
}

}  // namespace

const std::vector<std::string>& experiments() {
    static const std::vector<std::string> names{"symbol-check", "sample",     "semigroup-decay", "resolvent", "transform",
                                                "simulate",     "flow",       "dispersion",      "regime-sweep"};
    return names;
}

json default_config(const std::string& e) {
    json c{{"schema_version", kSchemaVersion}, {"experiment", e}, {"seed", std::uint64_t{1}}};
    if (e == "symbol-check") {
        c["model"] = stable_model(1.0);
        c["probe_radius"] = 10.0;
        c["probes"] = 256;
        c["moment_sigma"] = 1.5;
        c["symbol_radii"] = {0.0, 0.1, 1.0, 10.0, 100.0};
    } else if (e == "sample") {
        c["model"] = stable_model(1.0);
        c["T"] = 1.0;
        c["n_steps"] = 100;
        c["n_paths"] = 4;
        c["path"] = path_setup("auto");
        c["cf"] = {{"t", 1.0}, {"n_samples", 100000}, {"probes", {0.25, 0.5, 1.0, 2.0, 4.0}}, {"eps", 0.05}};
    } else if (e == "semigroup-decay") {
        const DecayOptions d;
        c["model"] = stable_model(1.5);
        c["f"] = {{"type", "sharp_bump"}, {"half_width", 1.0}};
        c["times"] = {0.01, 0.0215, 0.0464, 0.1, 0.215, 0.464, 1.0};
        c["lattice"] = d.lattice.to_json();
        c["n_mc"] = d.n_mc;
        c["fd_factor"] = d.fd_factor;
        c["eps"] = d.eps;
        c["slack"] = d.slack;
    } else if (e == "resolvent") {
        c["model"] = stable_model(1.0);
        c["f"] = {{"type", "constant"}, {"value", 1.0}};
        c["lambda"] = 2.0;
        c["drift"] = nullptr;
        c["k"] = {0.0};
        c["schauder_k"] = json::array();
        c["options"] = resolvent_options_to_json(ResolventOptions{});
    } else if (e == "transform") {
        c["model"] = stable_model(1.5);
        c["drift"] = holder_drift(0.6);
        c["transform"] = transform_block();
        c["allow_counterexample"] = false;
        c["inverse_probes"] = 2000;
    } else if (e == "simulate") {
        c["model"] = stable_model(1.5);
        c["drift"] = holder_drift(0.6);
        c["mode"] = "euler";
        c["x0"] = {0.0};
        c["T"] = 1.0;
        c["h"] = 0.01;
        c["h_list"] = {1e-2, 5e-3, 2.5e-3, 1.25e-3};
        c["n_paths"] = 4;
        c["path"] = path_setup("gaussian-AR");
        c["transform"] = transform_block();
        c["allow_counterexample"] = false;
    } else if (e == "flow") {
        c["model"] = stable_model(1.5);
        c["drift"] = holder_drift(0.6);
        c["starts"] = {-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0};
        c["T"] = 1.0;
        c["h"] = 1e-3;
        c["n_runs"] = 1000;
        c["derivative_delta"] = 1e-6;
        c["path"] = path_setup("auto");
    } else if (e == "dispersion") {
        c["model"] = stable_model(1.5);
        c["drift"] = holder_drift(0.6);
        c["x0"] = {0.0};
        c["deltas"] = {1e-1, 1e-2, 1e-3};
        c["hs"] = {1e-2, 1e-3};
        c["n_mc"] = 256;
        c["T"] = 1.0;
        c["separation_level"] = 0.1;
        c["slope_tolerance"] = 0.05;
        c["path"] = path_setup("auto");
        c["allow_counterexample"] = false;
    } else if (e == "regime-sweep") {
        c["alphas"] = {0.5, 1.0, 1.5};
        c["betas"] = {0.3, 0.6, 0.9};
        c["kappa"] = 1.0;
        c["bound"] = 1.0;
        c["deltas"] = {1e-1, 1e-2, 1e-3};
        c["h"] = 1e-3;
        c["n_mc"] = 256;
        c["T"] = 1.0;
        c["separation_level"] = 0.1;
        c["plateau_fraction"] = 0.05;
        c["path"] = path_setup("auto");
        c["allow_counterexample"] = false;
    } else {
        throw DomainError("unknown experiment: " + e);
    }
    return c;
}

json normalize_config(const json& raw) {
    if (!raw.is_object()) throw DomainError("config must be a JSON object");
    if (!raw.contains("experiment") || !raw["experiment"].is_string()) throw DomainError("config needs an experiment name");
    if (raw.contains("schema_version") && raw["schema_version"] != kSchemaVersion)
        throw DomainError("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
    json c = merge(default_config(raw["experiment"].get<std::string>()), raw, "");

    if (c.contains("model")) with_context("model", [&] { c["model"] = LevyModel::from_json(c["model"]).to_json(); });
    if (c.contains("drift") && !c["drift"].is_null())
        with_context("drift", [&] { c["drift"] = DriftSpec::from_json(c["drift"]).to_json(); });
    if (c.contains("f")) with_context("f", [&] { field_from_json(c["model"].at("dimension").get<int>(), c["f"]); });
    if (c.contains("options")) with_context("options", [&] { resolvent_options_from_json(c["options"]); });
    if (c.contains("transform"))
        with_context("transform.options", [&] { resolvent_options_from_json(c["transform"]["options"]); });
    return c;
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw DomainError(path + ": " + e.what());
    }
}

json resolvent_options_to_json(const ResolventOptions& o) {
    return {{"lattice", o.lattice.to_json()},
            {"n_mc", o.n_mc},
            {"batches", o.batches},
            {"levels", o.levels},
            {"gauss_nodes", o.gauss_nodes},
            {"tol", o.tol},
            {"eps", o.eps},
            {"scheme", to_string(o.scheme)},
            {"kernel_half_width", o.kernel_half_width},
            {"far_cap", o.far_cap},
            {"beta", o.beta},
            {"max_iterations", o.max_iterations},
            {"refuse_above", o.refuse_above},
            {"target_contraction", o.target_contraction},
            {"seminorm_margin", o.seminorm_margin},
            {"check_regime", o.check_regime}};
}

// The kernel seed is not part of the options block; runs take it from the root seed.
ResolventOptions resolvent_options_from_json(const json& raw, ResolventOptions base) {
    const json j = merge(resolvent_options_to_json(base), raw, "options");
    ResolventOptions o;
    o.lattice = Lattice::from_json(j["lattice"]);
    o.n_mc = j["n_mc"].get<std::size_t>();
    o.batches = j["batches"].get<int>();
    o.levels = j["levels"].get<int>();
    o.gauss_nodes = j["gauss_nodes"].get<int>();
    o.tol = j["tol"].get<double>();
    o.eps = j["eps"].get<double>();
    o.scheme = small_jump_scheme_from_string(j["scheme"].get<std::string>());
    o.kernel_half_width = j["kernel_half_width"].get<double>();
    o.far_cap = j["far_cap"].get<std::size_t>();
    o.beta = j["beta"].get<double>();
    o.max_iterations = j["max_iterations"].get<int>();
    o.refuse_above = j["refuse_above"].get<double>();
    o.target_contraction = j["target_contraction"].get<double>();
    o.seminorm_margin = j["seminorm_margin"].get<int>();
    o.check_regime = j["check_regime"].get<bool>();
    return o;
}

}  // namespace levyflow::cli
