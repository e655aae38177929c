#include "levyflow/cli.hpp"

#include "levyflow/drift.hpp"
#include "levyflow/parallel.hpp"
#include "levyflow/sde_engine.hpp"
#include "levyflow/semigroup.hpp"
#include "levyflow/stats.hpp"
#include "levyflow/zvonkin.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace levyflow::cli {

using nlohmann::json;

namespace {

class Csv {
public:
    explicit Csv(std::string header) { os_ << header << '\n'; os_.precision(17); }
    template <class... T>
    void row(const T&... v) {
        bool first = true;
        ((os_ << (first ? "" : ",") << v, first = false), ...);
        os_ << '\n';
    }
    std::string str() const { return os_.str(); }

private:
    std::ostringstream os_;
};

struct Context {
    json config;
    std::uint64_t seed;
    Emitter out;
    std::vector<Gate> gates;

    void gate(std::string name, bool pass, std::string detail) { gates.push_back({std::move(name), pass, std::move(detail)}); }
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

LevyModel model_of(const json& c) { return LevyModel::from_json(c.at("model")); }
DriftSpec drift_of(const json& c) { return DriftSpec::from_json(c.at("drift")); }

Vec vec_of(const json& j, int d, const std::string& what) {
    const Vec v = from_std(j.get<std::vector<double>>());
    if (v.size() != d) throw DomainError(what + " has the wrong dimension");
    return v;
}

PathSetup path_of(const json& j) {
    PathSetup p;
    p.eps_cut = j.at("eps_cut").get<double>();
    p.scheme = small_jump_scheme_from_string(j.at("scheme").get<std::string>());
    return p;
}

bool uniqueness_regime(double alpha, double beta) { return alpha >= 1.0 && alpha < 2.0 && beta < 1.0 && beta > 1.0 - alpha / 2.0; }
bool tanaka_regime(double alpha, double beta) { return alpha + beta < 1.0; }

std::string regime_name(double alpha, double beta) {
    if (uniqueness_regime(alpha, beta)) return "uniqueness";
    if (tanaka_regime(alpha, beta)) return "tanaka";
    return "open";
}

void require_regime(const json& c, double alpha, double beta) {
    if (!uniqueness_regime(alpha, beta) && !c.at("allow_counterexample").get<bool>())
        throw DomainError("(alpha, beta) = (" + fmt(alpha) + ", " + fmt(beta) +
                          ") is outside the pathwise uniqueness regime; pass --allow-counterexample to run it anyway");
}

void add_trajectories(Blob& blob, const std::vector<Trajectory>& paths) {
    for (std::size_t p = 0; p < paths.size(); ++p) {
        blob.add("times_" + std::to_string(p), paths[p].times);
        const int d = paths[p].values.empty() ? 0 : static_cast<int>(paths[p].values.front().size());
        for (int k = 0; k < d; ++k) {
            std::vector<double> col;
            for (const Vec& v : paths[p].values) col.push_back(v[k]);
            blob.add("x" + std::to_string(k) + "_" + std::to_string(p), col);
        }
    }
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return true;
}

json curve_json(const std::vector<LambdaStep>& curve) {
    json a = json::array();
    for (const auto& s : curve)
        a.push_back({{"lambda", s.lambda}, {"c_lambda", s.c_lambda}, {"refused", s.refused}, {"iterations", s.iterations},
                     {"contraction", s.contraction}});
    return a;
}

std::string curve_csv(const std::vector<LambdaStep>& curve) {
    Csv csv("lambda,c_lambda,refused,iterations,contraction");
    for (const auto& s : curve) csv.row(s.lambda, s.c_lambda, s.refused ? 1 : 0, s.iterations, s.contraction);
    return csv.str();
}

// Timings stay out of emitted files so replays hash identically.
json transform_json(const ZvonkinTransform& t) {
    json j = t.to_json();
    j["curve"] = curve_json(t.curve());
    return j;
}

std::shared_ptr<const ZvonkinTransform> build(Context& ctx, const LevyModel& model, const DriftSpec& b) {
    const json& tc = ctx.config.at("transform");
    TransformOptions o;
    o.resolvent = resolvent_options_from_json(tc.at("options"), o.resolvent);
    o.resolvent.seed = ctx.seed;
    o.lambda_schedule = tc.at("lambda_schedule").get<std::vector<double>>();
    o.allow_counterexample = ctx.config.value("allow_counterexample", false);
    try {
        return std::make_shared<const ZvonkinTransform>(build_transform(model, b, o));
    } catch (const ScheduleExhausted& e) {
        ctx.out.text("curve.csv", curve_csv(e.curve()));
        throw;
    }
}

void symbol_check(Context& ctx) {
    const json& c = ctx.config;
    const LevyModel model = model_of(c);
    const int d = model.dimension();
    const SectorBounds sb = check_sector_bounds(model, c["probe_radius"].get<double>(), c["probes"].get<int>());
    const double sigma = c["moment_sigma"].get<double>();
    const double moment = small_jump_moment(model, sigma);
    const auto origin = model.symbol(zero_vec(d));
    const DominationResult dom = dominates_truncated(model);

    Csv csv("radius,re_symbol,im_symbol");
    for (double r : c["symbol_radii"].get<std::vector<double>>()) {
        const auto s = model.symbol(unit_vec(d, 0) * r);
        csv.row(r, s.real(), s.imag());
    }
    ctx.out.text("symbol.csv", csv.str());
    ctx.out.json("symbol_check.json",
                 {{"sector_bounds", {{"c1", sb.c1}, {"c2", sb.c2}, {"pass", sb.pass}}},
                  {"small_jump_moment", {{"sigma", sigma}, {"value", std::isfinite(moment) ? json(moment) : json("inf")}}},
                  {"symbol_at_origin", {origin.real(), origin.imag()}},
                  {"domination",
                   {{"applicable", dom.applicable}, {"pass", dom.pass}, {"margin", dom.margin},
                    {"reference_scale", dom.reference_scale}, {"reference_radius", dom.reference_radius}}}});
    ctx.gate("sector_bounds", sb.pass, "c1 = " + fmt(sb.c1) + ", c2 = " + fmt(sb.c2));
    ctx.gate("symbol_at_origin", origin == std::complex<double>(0.0, 0.0), "psi(0) = " + fmt(std::abs(origin)));
    if (dom.applicable) ctx.gate("domination", dom.pass, "margin " + fmt(dom.margin));
}

void sample(Context& ctx) {
    const json& c = ctx.config;
    const LevyModel model = model_of(c);
    const int d = model.dimension();
    const PathSetup setup = path_of(c["path"]);
    PathOptions po;
    po.scheme = setup.scheme;
    const PathSampler sampler(model, setup.eps_cut, po);
    const RandomStream root(ctx.seed);
    std::vector<Trajectory> paths;
    for (int p = 0; p < c["n_paths"].get<int>(); ++p) {
        RandomStream rng = root.child(static_cast<std::uint64_t>(p));
        const JumpPath path = sampler.sample(c["T"].get<double>(), c["n_steps"].get<int>(), rng);
        paths.push_back({path.grid, path.values()});
    }
    Blob blob;
    blob.meta = {{"type", "SamplePaths"}, {"model", c["model"]}, {"paths", paths.size()}, {"scheme", to_string(sampler.scheme())}};
    add_trajectories(blob, paths);
    ctx.out.blob("paths.lvfb", blob);

    const json& cf = c["cf"];
    std::vector<Vec> probes;
    for (double r : cf["probes"].get<std::vector<double>>()) probes.push_back(unit_vec(d, 0) * r);
    RandomStream rng = root.child(1u << 20);
    const CfCheck check = empirical_cf_check(model, cf["t"].get<double>(), probes, cf["n_samples"].get<std::size_t>(), rng,
                                             cf["eps"].get<double>(), setup.scheme);
    Csv csv("u,deviation,se,bias_bound");
    for (const auto& p : check.probes) csv.row(p.u.norm(), p.deviation, p.se, p.bias_bound);
    ctx.out.text("cf.csv", csv.str());
    ctx.out.json("sample.json", {{"max_abs_deviation", check.max_abs_deviation}, {"se_at_max", check.se_at_max}, {"pass", check.pass}});
    ctx.gate("characteristic_function", check.pass, "max deviation " + fmt(check.max_abs_deviation) + " (SE " + fmt(check.se_at_max) + ")");
}

void semigroup_decay(Context& ctx) {
    const json& c = ctx.config;
    const LevyModel model = model_of(c);
    DecayOptions o;
    o.lattice = Lattice::from_json(c["lattice"]);
    o.n_mc = c["n_mc"].get<std::size_t>();
    o.seed = ctx.seed;
    o.fd_factor = c["fd_factor"].get<double>();
    o.eps = c["eps"].get<double>();
    o.slack = c["slack"].get<double>();
    const Field f = field_from_json(model.dimension(), c["f"]);
    const GradientDecay g = verify_gradient_decay(model, f, c["times"].get<std::vector<double>>(), o);
    Csv csv("t,gradient_sup,standard_error");
    for (std::size_t i = 0; i < g.times.size(); ++i) csv.row(g.times[i], g.norms[i], g.standard_errors[i]);
    ctx.out.text("decay.csv", csv.str());
    ctx.out.json("decay.json", g.to_json());
    ctx.gate("gradient_decay", g.pass, "slope " + fmt(g.slope) + " against -1/alpha = " + fmt(-1.0 / g.alpha));
}

void resolvent(Context& ctx) {
    const json& c = ctx.config;
    const LevyModel model = model_of(c);
    const int d = model.dimension();
    ResolventOptions o = resolvent_options_from_json(c["options"]);
    o.seed = ctx.seed;
    const Field f = field_from_json(d, c["f"]);
    const double lambda = c["lambda"].get<double>();
    const ResolventSolution s = c["drift"].is_null()
                                    ? resolvent_constant_drift(model, vec_of(c["k"], d, "k"), f, lambda, o)
                                    : resolvent_holder_drift(model, drift_of(c), f, lambda, o);
    ctx.out.blob("v.lvfb", s.v.to_blob());
    ctx.out.blob("dv.lvfb", s.dv.to_blob());
    Csv csv("node,x0,v,standard_error");
    for (std::size_t i = 0; i < o.lattice.size(); ++i) csv.row(i, o.lattice.node(i)[0], s.v.at(i), s.v.standard_error()[i]);
    ctx.out.text("v.csv", csv.str());
    json report = s.diagnostics();
    report["maximum_principle"] = s.satisfies_maximum_principle();
    ctx.gate("maximum_principle", s.satisfies_maximum_principle(),
             "lambda |v| = " + fmt(lambda * s.v_norm) + ", |f| + lambda budget = " + fmt(s.f_norm + lambda * s.error_budget));

    const auto ks = c["schauder_k"].get<std::vector<double>>();
    if (!ks.empty()) {
        std::vector<Vec> k_list;
        for (double k : ks) k_list.push_back(unit_vec(d, 0) * k);
        const SchauderCheck sc = verify_schauder_k_independence(model, f, lambda, k_list, o);
        Csv sk("k_norm,ratio");
        for (std::size_t i = 0; i < sc.ratios.size(); ++i) sk.row(sc.k_norms[i], sc.ratios[i]);
        ctx.out.text("schauder.csv", sk.str());
        report["schauder"] = sc.to_json();
        ctx.gate("schauder_spread", sc.pass, "spread " + fmt(sc.spread));
    }
    ctx.out.json("resolvent.json", report);
}

void transform(Context& ctx) {
    const json& c = ctx.config;
    const LevyModel model = model_of(c);
    const DriftSpec b = drift_of(c);
    require_regime(c, model.alpha(), b.beta());
    std::shared_ptr<const ZvonkinTransform> t;
    try {
        t = build(ctx, model, b);
    } catch (const ScheduleExhausted& e) {
        ctx.gate("c_lambda_below_one_third", false, e.what());
        return;
    }
    double round_trip = 0.0, max_ratio = 0.0, dpsi = 0.0;
    const Lattice& lat = t->u().lattice();
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const Vec x = lat.node(i);
        const InverseResult r = psi_inverse_detail(*t, psi_forward(*t, x));
        round_trip = std::max(round_trip, (r.x - x).norm());
        max_ratio = std::max(max_ratio, r.max_ratio);
        dpsi = std::max(dpsi, dpsi_inverse(*t, x).norm());
    }
    const double c_lambda = t->c_lambda();
    const AuxiliaryCoeffs aux(t, model, c["transform"]["r"].get<double>());
    const json checks{{"round_trip", round_trip},
                      {"newton_max_ratio", max_ratio},
                      {"dpsi_inverse_sup", dpsi},
                      {"dpsi_inverse_bound", 1.0 / (1.0 - c_lambda)},
                      {"dpsi_inverse_holder", dpsi_inverse_holder(*t, c["inverse_probes"].get<int>())},
                      {"du_holder", estimate_holder_seminorm(t->du(), t->gamma())},
                      {"btilde_lipschitz", aux.btilde_lipschitz(200)},
                      {"small_jump_lipschitz", aux.small_jump_lipschitz(20)}};
    ctx.out.blob("u.lvfb", t->u_blob());
    ctx.out.blob("du.lvfb", t->du_blob());
    ctx.out.text("curve.csv", curve_csv(t->curve()));
    ctx.out.json("transform.json", {{"transform", transform_json(*t)}, {"checks", checks}});
    ctx.gate("c_lambda_below_one_third", c_lambda < 1.0 / 3.0, "c = " + fmt(c_lambda) + " at lambda = " + fmt(t->lambda()));
    ctx.gate("round_trip", round_trip < 1e-8, fmt(round_trip));
    ctx.gate("dpsi_inverse_bound", dpsi <= 1.0 / (1.0 - c_lambda) + 1e-3, fmt(dpsi));
    ctx.gate("newton_contraction", max_ratio <= c_lambda + 0.05, fmt(max_ratio));
}

void simulate(Context& ctx) {
    const json& c = ctx.config;
    const LevyModel model = model_of(c);
    const int d = model.dimension();
    const DriftSpec b = drift_of(c);
    const std::string mode = c["mode"].get<std::string>();
    const Vec x0 = vec_of(c["x0"], d, "x0");
    const double T = c["T"].get<double>();
    const double h = c["h"].get<double>();
    const PathSetup setup = path_of(c["path"]);
    const int n_paths = c["n_paths"].get<int>();
    const auto n_steps = static_cast<int>(std::lround(T / h));
    if (n_steps < 1) throw DomainError("h must not exceed T");
    PathOptions po;
    po.scheme = setup.scheme;
    const RandomStream root(ctx.seed);

    SimResult sim;
    sim.config = c;
    if (mode == "euler") {
        const PathSampler sampler(model, setup.eps_cut, po);
        for (int p = 0; p < n_paths; ++p) {
            RandomStream rng = root.child(static_cast<std::uint64_t>(p));
            sim.paths.push_back(euler_solve(sampler.sample(T, n_steps, rng), b, x0));
        }
        sim.diagnostics = {{"mode", mode}};
        ctx.out.blob("sim.lvfb", sim.to_blob());
        ctx.out.json("sim.json", sim.diagnostics);
        return;
    }
    if (mode != "auxiliary" && mode != "consistency" && mode != "ito-check") throw DomainError("unknown simulate mode: " + mode);
    require_regime(c, model.alpha(), b.beta());
    std::shared_ptr<const ZvonkinTransform> t = build(ctx, model, b);
    const AuxiliaryCoeffs aux(t, model, c["transform"]["r"].get<double>());
    json diag{{"mode", mode}, {"lambda", t->lambda()}, {"c_lambda", t->c_lambda()}};

    if (mode == "consistency") {
        const ConsistencyResult r =
            transform_consistency(model, aux, x0, c["h_list"].get<std::vector<double>>(), T, ctx.seed, n_paths, setup);
        Csv csv("h,sup_error,sup_error_se,ito_defect,ito_defect_se");
        for (std::size_t i = 0; i < r.h.size(); ++i)
            csv.row(r.h[i], r.sup_errors[i], r.sup_error_se[i], r.ito_defects[i], r.ito_defect_se[i]);
        ctx.out.text("consistency.csv", csv.str());
        diag["consistency"] = r.to_json();
        ctx.out.json("sim.json", diag);
        // Only meaningful when the steps are listed coarse to fine.
        ctx.gate("sup_error_decreasing", strictly_decreasing(r.sup_errors), "coarse to fine: " + diag["consistency"]["sup_errors"].dump());
        ctx.gate("ito_defect_decreasing", strictly_decreasing(r.ito_defects), "coarse to fine: " + diag["consistency"]["ito_defects"].dump());
        return;
    }

    PathOptions jo;
    jo.scheme = setup.scheme;
    const PathSampler sampler(model, setup.eps_cut, jo);
    if (mode == "ito-check") {
        RandomStream rng = root.child(0);
        const JumpPath path = sampler.sample(T, n_steps, rng);
        const ItoCheck ic = ito_identity_check(aux, path, x0);
        Csv csv("t,defect");
        for (std::size_t k = 0; k < ic.defect.size(); ++k) csv.row(path.grid[k], ic.defect[k]);
        ctx.out.text("ito.csv", csv.str());
        diag["max_defect"] = ic.max_defect;
        diag["leakage"] = t->leakage();
        ctx.out.json("sim.json", diag);
        return;
    }
    std::vector<double> errors;
    for (int p = 0; p < n_paths; ++p) {
        RandomStream rng = root.child(static_cast<std::uint64_t>(p));
        const JumpPath path = sampler.sample(T, n_steps, rng);
        const Trajectory x = euler_solve(path, b, x0);
        Trajectory y = solve_auxiliary(path, aux, psi_forward(*t, x0));
        double e = 0.0;
        for (std::size_t k = 0; k < y.values.size(); ++k) {
            y.values[k] = psi_inverse(*t, y.values[k]);
            e = std::max(e, (y.values[k] - x.values[k]).norm());
        }
        errors.push_back(e);
        sim.paths.push_back(x);
        sim.paths.push_back(y);
    }
    diag["paths"] = "even index: Euler X, odd index: psi^{-1}(Y) from the auxiliary equation";
    diag["sup_errors"] = errors;
    diag["leakage"] = t->leakage();
    sim.diagnostics = diag;
    ctx.out.blob("sim.lvfb", sim.to_blob());
    ctx.out.json("sim.json", diag);
}

void flow(Context& ctx) {
    const json& c = ctx.config;
    const LevyModel model = model_of(c);
    const int d = model.dimension();
    const DriftSpec b = drift_of(c);
    std::vector<Vec> starts;
    for (const auto& s : c["starts"]) starts.push_back(s.is_array() ? vec_of(s, d, "start") : Vec::Constant(d, s.get<double>()));
    FlowOptions o;
    o.n_runs = c["n_runs"].get<int>();
    o.derivative_delta = c["derivative_delta"].get<double>();
    o.path = path_of(c["path"]);
    const FlowResult r = flow_simulation(model, b, starts, c["T"].get<double>(), c["h"].get<double>(), ctx.seed, o);
    SimResult sim;
    sim.paths = r.example;
    sim.config = c;
    sim.diagnostics = r.to_json();
    ctx.out.blob("flow_example.lvfb", sim.to_blob());
    ctx.out.json("flow.json", r.to_json());
    if (d == 1)
        ctx.gate("order_preserved", r.order_violations == 0,
                 std::to_string(r.order_violations) + " violations over " + std::to_string(r.n_runs) + " runs");
}

double median_slope(const DispersionTable& t, double h) {
    std::vector<double> x, y;
    for (const auto& r : t.rows)
        if (r.h == h) {
            x.push_back(std::log(r.delta));
            y.push_back(std::log(r.median));
        }
    if (x.size() < 2) return NAN;
    return least_squares_line(x, y).slope;
}

void dispersion(Context& ctx) {
    const json& c = ctx.config;
    const LevyModel model = model_of(c);
    const int d = model.dimension();
    const DriftSpec b = drift_of(c);
    require_regime(c, model.alpha(), b.beta());
    DispersionOptions o;
    o.T = c["T"].get<double>();
    o.separation_level = c["separation_level"].get<double>();
    o.path = path_of(c["path"]);
    const auto hs = c["hs"].get<std::vector<double>>();
    const DispersionTable t = uniqueness_dispersion(model, b, vec_of(c["x0"], d, "x0"), c["deltas"].get<std::vector<double>>(), hs,
                                                    c["n_mc"].get<int>(), ctx.seed, o);
    json j = t.to_json();
    json slopes = json::array();
    for (double h : hs) slopes.push_back({{"h", h}, {"median_slope", median_slope(t, h)}});
    j["median_slopes"] = slopes;
    j["regime"] = regime_name(model.alpha(), b.beta());
    ctx.out.text("dispersion.csv", t.to_csv());
    ctx.out.json("dispersion.json", j);
    if (uniqueness_regime(model.alpha(), b.beta())) {
        const double h = *std::min_element(hs.begin(), hs.end());
        const double s = median_slope(t, h);
        ctx.gate("proportional_decay", s >= 1.0 - c["slope_tolerance"].get<double>(),
                 "log-log slope of the median in delta " + fmt(s) + " at h = " + fmt(h));
    }
}

void regime_sweep(Context& ctx) {
    const json& c = ctx.config;
    const auto alphas = c["alphas"].get<std::vector<double>>();
    const auto betas = c["betas"].get<std::vector<double>>();
    for (double a : alphas)
        for (double be : betas) require_regime(c, a, be);
    const auto deltas = c["deltas"].get<std::vector<double>>();
    const double dmin = *std::min_element(deltas.begin(), deltas.end());
    const double h = c["h"].get<double>();
    DispersionOptions o;
    o.T = c["T"].get<double>();
    o.separation_level = c["separation_level"].get<double>();
    o.path = path_of(c["path"]);
    const double plateau_level = c["plateau_fraction"].get<double>();

    Csv csv("alpha,beta,regime,median_at_min_delta,median_ratio,median_slope,separated_fraction,q90,plateau");
    json cells = json::array();
    bool pattern = true;
    std::string misses;
    for (double a : alphas)
        for (double be : betas) {
            const LevyModel model = LevyModel::isotropic_stable(1, a);
            const DriftSpec b = DriftSpec::holder_power(1, be, c["kappa"].get<double>(), c["bound"].get<double>());
            const DispersionTable t = uniqueness_dispersion(model, b, zero_vec(1), deltas, {h}, c["n_mc"].get<int>(), ctx.seed, o);
            const DispersionRow& r = t.at(dmin, h);
            const bool plateau = r.separated_fraction >= plateau_level;
            const std::string regime = regime_name(a, be);
            const double slope = median_slope(t, h);
            csv.row(a, be, regime, r.median, r.median / dmin, slope, r.separated_fraction, r.q90, plateau ? 1 : 0);
            cells.push_back({{"alpha", a}, {"beta", be}, {"regime", regime}, {"median_at_min_delta", r.median},
                             {"median_slope", slope}, {"separated_fraction", r.separated_fraction}, {"q90", r.q90},
                             {"plateau", plateau}});
            if ((regime == "tanaka" && !plateau) || (regime == "uniqueness" && plateau)) {
                pattern = false;
                misses += " (" + fmt(a) + ", " + fmt(be) + ")";
            }
        }
    Csv lines("alpha,beta_uniqueness_line,beta_tanaka_line");
    for (double a : alphas) lines.row(a, 1.0 - a / 2.0, 1.0 - a);
    ctx.out.text("regime_sweep.csv", csv.str());
    ctx.out.text("regime_lines.csv", lines.str());
    ctx.out.json("regime_sweep.json", {{"cells", cells},
                                       {"lines", {{"uniqueness", "beta = 1 - alpha/2"}, {"tanaka", "alpha + beta = 1"}}},
                                       {"plateau_rule", "separated fraction at the smallest delta >= plateau_fraction"}});
    ctx.gate("plateau_pattern", pattern, pattern ? "plateau in every alpha+beta<1 cell and in no uniqueness cell" : "mismatch at" + misses);
}

}  // namespace

RunManifest run(const json& raw, const std::string& out_dir) {
    const json config = normalize_config(raw);
    Context ctx{config, config["seed"].get<std::uint64_t>(), Emitter(out_dir), {}};
    const std::string e = config["experiment"].get<std::string>();
    try {
        if (e == "symbol-check") symbol_check(ctx);
        else if (e == "sample") sample(ctx);
        else if (e == "semigroup-decay") semigroup_decay(ctx);
        else if (e == "resolvent") resolvent(ctx);
        else if (e == "transform") transform(ctx);
        else if (e == "simulate") simulate(ctx);
        else if (e == "flow") flow(ctx);
        else if (e == "dispersion") dispersion(ctx);
        else if (e == "regime-sweep") regime_sweep(ctx);
        else throw DomainError("unknown experiment: " + e);
    } catch (const Error& err) {
        throw DomainError(e + ": " + err.what());
    }
    RunManifest m;
    m.experiment = e;
    m.config = config;
    m.root_seed = ctx.seed;
    m.outputs = ctx.out.outputs();
    m.gates = ctx.gates;
    const auto path = std::filesystem::path(out_dir) / "manifest.json";
    std::ofstream(path) << m.to_json().dump(2) << '\n';
    return m;
}

namespace {

void report(const RunManifest& m, std::ostream& os) {
    for (const auto& o : m.outputs) os << "wrote " << o.path << " (" << o.bytes << " bytes, sha256 " << o.sha256.substr(0, 12) << ")\n";
    for (const auto& g : m.gates) os << (g.pass ? "PASS " : "FAIL ") << g.name << ": " << g.detail << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Levy-driven SDE experiments: samplers, resolvent solves, Zvonkin transforms, flows"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker cap (default: LEVYFLOW_THREADS or hardware concurrency)");

    struct Opts {
        std::string config, out;
        bool allow = false, print = false;
        std::uint64_t seed = 0;
        bool seed_set = false;
    };
    std::vector<std::pair<CLI::App*, std::shared_ptr<Opts>>> subs;
    for (const auto& e : experiments()) {
        auto o = std::make_shared<Opts>();
        CLI::App* s = app.add_subcommand(e, "run the " + e + " experiment");
        s->add_option("--config", o->config, "JSON config (defaults for every missing key)");
        s->add_option("--out", o->out, "output directory");
        s->add_flag("--allow-counterexample", o->allow, "run outside the pathwise uniqueness regime");
        s->add_flag("--print-config", o->print, "print the normalized config and exit");
        s->add_option("--seed", o->seed, "root seed (overrides the config)")->each([o](const std::string&) { o->seed_set = true; });
        subs.emplace_back(s, o);
    }
    std::string manifest_path, replay_out;
    CLI::App* rep = app.add_subcommand("replay", "re-run a manifest and compare output hashes");
    rep->add_option("manifest", manifest_path, "manifest.json of an earlier run")->required();
    rep->add_option("--out", replay_out, "output directory for the re-run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    try {
        if (threads > 0) set_thread_count(threads);
        if (rep->parsed()) {
            const ReplayResult r = replay(manifest_path, replay_out);
            report(r.rerun, std::cout);
            for (const auto& m : r.mismatches) std::cout << "MISMATCH " << m << '\n';
            std::cout << (r.identical() ? "replay identical\n" : "replay differs\n");
            return r.identical() ? 0 : 1;
        }
        for (const auto& [s, o] : subs) {
            if (!s->parsed()) continue;
            json cfg = o->config.empty() ? json{{"experiment", s->get_name()}} : load_json(o->config);
            if (!cfg.contains("experiment")) cfg["experiment"] = s->get_name();
            if (cfg["experiment"] != s->get_name()) throw DomainError("config is for experiment " + cfg["experiment"].dump());
            if (o->allow) cfg["allow_counterexample"] = true;
            if (o->seed_set) cfg["seed"] = o->seed;
            if (o->print) {
                std::cout << normalize_config(cfg).dump(2) << '\n';
                return 0;
            }
            if (o->out.empty()) throw DomainError("--out is required");
            const RunManifest m = run(cfg, o->out);
            report(m, std::cout);
            return m.passed() ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

}  // namespace levyflow::cli
