#include "levyflow/sde_engine.hpp"

#include "levyflow/parallel.hpp"
#include "levyflow/stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace levyflow {

namespace {

int cells_for(double T, double h) {
    const double n = T / h;
    const long r = std::lround(n);
    if (r < 1 || std::abs(n - static_cast<double>(r)) > 1e-9 * n) throw DomainError("step must divide the horizon");
    return static_cast<int>(r);
}

void check_path(const JumpPath& path, int d) {
    if (path.dimension != d) throw DomainError("path and drift dimensions differ");
    if (path.grid.size() != path.increments.size() + 1) throw DomainError("malformed path");
}

}  // namespace

Trajectory euler_solve(const JumpPath& path, const DriftSpec& b, const Vec& x0) {
    check_path(path, b.dimension());
    if (x0.size() != b.dimension()) throw DomainError("start has the wrong dimension");
    Trajectory tr;
    tr.times = path.grid;
    tr.values.reserve(path.grid.size());
    Vec x = x0;
    tr.values.push_back(x);
    for (std::size_t k = 0; k < path.segments(); ++k) {
        x = x + b(x) * path.dt(k) + path.increments[k];
        tr.values.push_back(x);
    }
    return tr;
}

Trajectory solve_auxiliary(const JumpPath& path, const AuxiliaryCoeffs& coeffs, const Vec& y0) {
    const ZvonkinTransform& t = coeffs.transform();
    const int d = t.dimension();
    check_path(path, d);
    if (y0.size() != d) throw DomainError("start has the wrong dimension");
    if (path.scheme == SmallJumpScheme::Exact && !path.big_jumps.empty()) throw DomainError("unexpected recorded jumps");
    if (path.eps_cut > coeffs.r() && path.scheme != SmallJumpScheme::Exact)
        throw DomainError("path cut must not exceed the auxiliary cutoff r");
    const double eps = path.eps_cut;
    const Vec c = path.compensation_drift.size() == d ? path.compensation_drift : zero_vec(d);
    Trajectory tr;
    tr.times = path.grid;
    tr.values.reserve(path.grid.size());
    Vec y = y0;
    tr.values.push_back(y);
    for (std::size_t k = 0; k < path.segments(); ++k) {
        const double dt = path.dt(k);
        const Vec x = psi_inverse(t, y);
        const Vec drift = t.lambda() * t.u_at(x) - coeffs.jump_compensator_at(x, eps) + c;
        const Vec ds = path.small_increments[k] - c * dt;
        y = y + drift * dt + ds + t.du_at(x) * ds;
        const int j = path.jump_at_end[k];
        if (j >= 0) y = y + coeffs.g(y, path.big_jumps[static_cast<std::size_t>(j)].z);
        tr.values.push_back(y);
    }
    return tr;
}

ItoCheck ito_identity_check(const AuxiliaryCoeffs& coeffs, const JumpPath& path, const Vec& x0) {
    const ZvonkinTransform& t = coeffs.transform();
    const int d = t.dimension();
    check_path(path, d);
    if (path.scheme == SmallJumpScheme::Exact && path.segments() > 0)
        throw DomainError("the Ito check needs a path with recorded jumps");
    const DriftSpec& b = t.drift();
    const double eps = path.eps_cut;
    const Vec c = path.compensation_drift.size() == d ? path.compensation_drift : zero_vec(d);

    ItoCheck out;
    out.defect.push_back(0.0);
    Vec x = x0;
    Vec l = zero_vec(d);
    Vec integral = zero_vec(d);
    const Vec u0 = t.u_at(x0);
    for (std::size_t k = 0; k < path.segments(); ++k) {
        const double dt = path.dt(k);
        const Vec ux = t.u_at(x);
        const Vec ds = path.small_increments[k] - c * dt;
        integral += (t.lambda() * ux - coeffs.jump_compensator_at(x, eps)) * dt + t.du_at(x) * ds;
        const Vec before = x + b(x) * dt + path.small_increments[k];
        Vec next = before;
        const int j = path.jump_at_end[k];
        if (j >= 0) {
            const Vec& z = path.big_jumps[static_cast<std::size_t>(j)].z;
            integral += t.u_at(Vec(before + z)) - t.u_at(before);
            next = before + z;
        }
        l += path.increments[k];
        x = next;
        const Vec lhs = t.u_at(x) - u0;
        const Vec rhs = x0 + l - x + integral;
        out.defect.push_back((lhs - rhs).norm());
    }
    out.max_defect = *std::max_element(out.defect.begin(), out.defect.end());
    return out;
}

nlohmann::json ConsistencyResult::to_json() const {
    return {{"h", h}, {"sup_errors", sup_errors}, {"sup_error_se", sup_error_se}, {"ito_defects", ito_defects},
            {"ito_defect_se", ito_defect_se}, {"leakage", leakage}, {"n_paths", n_paths}};
}

ConsistencyResult transform_consistency(const LevyModel& model, const AuxiliaryCoeffs& coeffs, const Vec& x0,
                                        const std::vector<double>& h_list, double T, std::uint64_t seed,
                                        int n_paths, const PathSetup& setup) {
    if (h_list.empty() || n_paths < 1) throw DomainError("need step sizes and paths");
    const double h_min = *std::min_element(h_list.begin(), h_list.end());
    const int n_fine = cells_for(T, h_min);
    std::vector<int> factors;
    for (double h : h_list) {
        const int n = cells_for(T, h);
        if (n_fine % n != 0) throw DomainError("every step must be a multiple of the finest one");
        factors.push_back(n_fine / n);
    }
    PathOptions popt;
    popt.scheme = setup.scheme;
    const PathSampler sampler(model, setup.eps_cut, popt);
    const ZvonkinTransform& t = coeffs.transform();
    const Vec y0 = psi_forward(t, x0);
    // Tabulate the compensator before going parallel.
    coeffs.jump_compensator_at(x0, setup.eps_cut);

    const std::size_t nh = h_list.size();
    std::vector<double> err(static_cast<std::size_t>(n_paths) * nh), ito(static_cast<std::size_t>(n_paths) * nh);
    parallel_for(static_cast<std::size_t>(n_paths), [&](std::size_t p) {
        RandomStream rng(derive_seed(seed, p));
        const JumpPath fine = sampler.sample(T, n_fine, rng);
        for (std::size_t i = 0; i < nh; ++i) {
            const JumpPath path = fine.coarsen(factors[i]);
            const Trajectory x = euler_solve(path, t.drift(), x0);
            const Trajectory y = solve_auxiliary(path, coeffs, y0);
            double e = 0.0;
            for (std::size_t k = 0; k < x.values.size(); ++k)
                e = std::max(e, (x.values[k] - psi_inverse(t, y.values[k])).norm());
            err[p * nh + i] = e;
            ito[p * nh + i] = ito_identity_check(coeffs, path, x0).max_defect;
        }
    });
    ConsistencyResult r;
    r.h = h_list;
    r.n_paths = n_paths;
    for (std::size_t i = 0; i < nh; ++i) {
        std::vector<double> a, b;
        for (int p = 0; p < n_paths; ++p) {
            a.push_back(err[static_cast<std::size_t>(p) * nh + i]);
            b.push_back(ito[static_cast<std::size_t>(p) * nh + i]);
        }
        const MeanSe ma = mean_se(a), mb = mean_se(b);
        r.sup_errors.push_back(ma.mean);
        r.sup_error_se.push_back(ma.se);
        r.ito_defects.push_back(mb.mean);
        r.ito_defect_se.push_back(mb.se);
    }
    r.leakage = t.leakage();
    return r;
}

nlohmann::json FlowResult::to_json() const {
    return {{"n_runs", n_runs}, {"n_starts", n_starts}, {"order_violations", order_violations}, {"min_gap", min_gap},
            {"derivative_mean", derivative_mean}, {"derivative_min", derivative_min}, {"derivative_max", derivative_max}};
}

FlowResult flow_simulation(const LevyModel& model, const DriftSpec& b, const std::vector<Vec>& starts, double T,
                           double h, std::uint64_t seed, const FlowOptions& options) {
    const int d = model.dimension();
    if (b.dimension() != d) throw DomainError("drift and model dimensions differ");
    if (starts.size() < 2) throw DomainError("need at least two starts");
    for (const Vec& s : starts)
        if (s.size() != d) throw DomainError("start has the wrong dimension");
    if (d == 1)
        for (std::size_t i = 1; i < starts.size(); ++i)
            if (!(starts[i][0] > starts[i - 1][0])) throw DomainError("starts must be strictly increasing");
    if (options.n_runs < 1) throw DomainError("need at least one run");
    const int n = cells_for(T, h);
    PathOptions popt;
    popt.scheme = options.path.scheme;
    const PathSampler sampler(model, options.path.eps_cut, popt);
    const std::size_t ns = starts.size();
    const double delta = options.derivative_delta;

    struct RunStats {
        std::uint64_t violations = 0;
        double min_gap = 0.0;
        std::vector<double> derivative;
    };
    std::vector<RunStats> runs(static_cast<std::size_t>(options.n_runs));
    std::vector<Trajectory> example;
    parallel_for(runs.size(), [&](std::size_t r) {
        RandomStream rng(derive_seed(seed, r));
        const JumpPath path = sampler.sample(T, n, rng);
        std::vector<Trajectory> tr;
        for (const Vec& s : starts) tr.push_back(euler_solve(path, b, s));
        RunStats& st = runs[r];
        st.min_gap = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < path.grid.size(); ++k) {
            for (std::size_t i = 0; i < ns; ++i)
                for (std::size_t j = i + 1; j < ns; ++j) {
                    const Vec& a = tr[i].values[k];
                    const Vec& c = tr[j].values[k];
                    if (d == 1 && a[0] > c[0]) ++st.violations;
                    st.min_gap = std::min(st.min_gap, (a - c).norm());
                }
        }
        for (std::size_t i = 0; i < ns; ++i) {
            const Trajectory shifted = euler_solve(path, b, Vec(starts[i] + unit_vec(d, 0) * delta));
            st.derivative.push_back((shifted.values.back() - tr[i].values.back())[0] / delta);
        }
        if (r == 0) example = std::move(tr);
    });
    FlowResult out;
    out.n_runs = options.n_runs;
    out.n_starts = static_cast<int>(ns);
    out.min_gap = std::numeric_limits<double>::infinity();
    out.derivative_mean.assign(ns, 0.0);
    out.derivative_min = std::numeric_limits<double>::infinity();
    out.derivative_max = -std::numeric_limits<double>::infinity();
    for (const RunStats& st : runs) {
        out.order_violations += st.violations;
        out.min_gap = std::min(out.min_gap, st.min_gap);
        for (std::size_t i = 0; i < ns; ++i) {
            out.derivative_mean[i] += st.derivative[i] / static_cast<double>(runs.size());
            out.derivative_min = std::min(out.derivative_min, st.derivative[i]);
            out.derivative_max = std::max(out.derivative_max, st.derivative[i]);
        }
    }
    out.example = std::move(example);
    return out;
}

const DispersionRow& DispersionTable::at(double delta, double h) const {
    for (const auto& r : rows)
        if (std::abs(r.delta - delta) <= 1e-12 * delta && std::abs(r.h - h) <= 1e-12 * h) return r;
    throw DomainError("no dispersion row for the requested (delta, h)");
}

nlohmann::json DispersionTable::to_json() const {
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : rows)
        rs.push_back({{"delta", r.delta}, {"h", r.h}, {"median", r.median}, {"q90", r.q90},
                      {"separated_fraction", r.separated_fraction}});
    return {{"rows", rs}, {"n_mc", n_mc}, {"separation_level", separation_level}};
}

std::string DispersionTable::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "delta,h,median,q90,separated_fraction\n";
    for (const auto& r : rows) os << r.delta << ',' << r.h << ',' << r.median << ',' << r.q90 << ',' << r.separated_fraction << '\n';
    return os.str();
}

DispersionTable uniqueness_dispersion(const LevyModel& model, const DriftSpec& b, const Vec& x0,
                                      const std::vector<double>& delta_list, const std::vector<double>& h_list,
                                      int n_mc, std::uint64_t seed, const DispersionOptions& options) {
    const int d = model.dimension();
    if (b.dimension() != d || x0.size() != d) throw DomainError("dimensions differ");
    if (delta_list.empty() || h_list.empty() || n_mc < 1) throw DomainError("need deltas, steps and samples");
    const double T = options.T;
    const double h_min = *std::min_element(h_list.begin(), h_list.end());
    const int n_fine = cells_for(T, h_min);
    std::vector<int> factors;
    for (double h : h_list) {
        const int n = cells_for(T, h);
        if (n_fine % n != 0) throw DomainError("every step must be a multiple of the finest one");
        factors.push_back(n_fine / n);
    }
    PathOptions popt;
    popt.scheme = options.path.scheme;
    const PathSampler sampler(model, options.path.eps_cut, popt);
    const std::size_t nd = delta_list.size(), nh = h_list.size();
    std::vector<double> sup(static_cast<std::size_t>(n_mc) * nd * nh);
    parallel_for(static_cast<std::size_t>(n_mc), [&](std::size_t r) {
        RandomStream rng(derive_seed(seed, r));
        const JumpPath fine = sampler.sample(T, n_fine, rng);
        for (std::size_t i = 0; i < nh; ++i) {
            const JumpPath path = fine.coarsen(factors[i]);
            const Trajectory base = euler_solve(path, b, x0);
            for (std::size_t j = 0; j < nd; ++j) {
                const Trajectory other = euler_solve(path, b, Vec(x0 + unit_vec(d, 0) * delta_list[j]));
                double s = 0.0;
                for (std::size_t k = 0; k < base.values.size(); ++k) s = std::max(s, (base.values[k] - other.values[k]).norm());
                sup[(r * nh + i) * nd + j] = s;
            }
        }
    });
    DispersionTable table;
    table.n_mc = n_mc;
    table.separation_level = options.separation_level;
    for (std::size_t i = 0; i < nh; ++i)
        for (std::size_t j = 0; j < nd; ++j) {
            std::vector<double> v;
            std::size_t sep = 0;
            for (int r = 0; r < n_mc; ++r) {
                const double s = sup[(static_cast<std::size_t>(r) * nh + i) * nd + j];
                v.push_back(s);
                if (s > options.separation_level) ++sep;
            }
            DispersionRow row;
            row.delta = delta_list[j];
            row.h = h_list[i];
            row.median = median(v);
            row.q90 = quantile(v, 0.9);
            row.separated_fraction = static_cast<double>(sep) / n_mc;
            table.rows.push_back(row);
        }
    return table;
}

Blob SimResult::to_blob() const {
    Blob blob;
    blob.meta = {{"type", "SimResult"}, {"config", config}, {"diagnostics", diagnostics}, {"paths", paths.size()}};
    for (std::size_t p = 0; p < paths.size(); ++p) {
        const auto& tr = paths[p];
        blob.add("times_" + std::to_string(p), tr.times);
        const int d = tr.values.empty() ? 0 : static_cast<int>(tr.values.front().size());
        for (int k = 0; k < d; ++k) {
            std::vector<double> col;
            col.reserve(tr.values.size());
            for (const Vec& v : tr.values) col.push_back(v[k]);
            blob.add("x" + std::to_string(k) + "_" + std::to_string(p), col);
        }
    }
    return blob;
}

}  // namespace levyflow
