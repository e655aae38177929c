#include "levyflow/samplers.hpp"

#include "levyflow/quadrature.hpp"

#include <math.h>  // boost pchip calls isnan unqualified
#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace levyflow {

namespace {

constexpr int kRadiusTableNodes = 4096;
constexpr long kRejectionCap = 1000000;

struct SchemeName {
    SmallJumpScheme scheme;
    const char* name;
};

constexpr SchemeName kSchemeNames[] = {
    {SmallJumpScheme::Auto, "auto"},
    {SmallJumpScheme::Exact, "exact"},
    {SmallJumpScheme::GaussianAR, "gaussian-AR"},
    {SmallJumpScheme::Drop, "drop"},
};

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("alpha must lie in (0,2)");
}

// Standard symmetric stable variate, characteristic function exp(-|u|^alpha).
double standard_stable(double alpha, RandomStream& rng) {
    const double v = std::numbers::pi * (rng.uniform() - 0.5);
    if (std::abs(alpha - 1.0) < 1e-14) return std::tan(v);
    const double w = rng.exponential();
    return std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
           std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
}

Mat symmetric_sqrt(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(m);
    Vec ev = es.eigenvalues();
    for (int i = 0; i < ev.size(); ++i) ev[i] = std::sqrt(std::max(0.0, ev[i]));
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

std::string to_string(SmallJumpScheme s) {
    for (const auto& e : kSchemeNames)
        if (e.scheme == s) return e.name;
    throw DomainError("unknown small-jump scheme");
}

SmallJumpScheme small_jump_scheme_from_string(const std::string& s) {
    for (const auto& e : kSchemeNames)
        if (s == e.name) return e.scheme;
    throw DomainError("unknown small-jump scheme '" + s + "'");
}

double sample_stable_increment(double alpha, double scale, double dt, RandomStream& rng) {
    check_alpha(alpha);
    if (!(scale > 0.0)) throw DomainError("scale must be positive");
    if (dt < 0.0) throw DomainError("dt must be non-negative");
    const double x = standard_stable(alpha, rng);
    if (dt == 0.0) return 0.0;
    return std::pow(scale * dt, 1.0 / alpha) * x;
}

double sample_positive_stable(double a, RandomStream& rng) {
    if (!(a > 0.0 && a < 1.0)) throw DomainError("positive stable index must lie in (0,1)");
    const double u = std::numbers::pi * rng.uniform();
    const double w = rng.exponential();
    return std::sin(a * u) / std::pow(std::sin(u), 1.0 / a) * std::pow(std::sin((1.0 - a) * u) / w, (1.0 - a) / a);
}

Vec sample_isotropic_stable_increment(int d, double alpha, double scale, double dt, RandomStream& rng) {
    check_alpha(alpha);
    if (d == 1) return Vec::Constant(1, sample_stable_increment(alpha, scale, dt, rng));
    // Brownian motion with E exp(i<u,B_a>) = exp(-a|u|^2) run at an (alpha/2)-stable time.
    const double a = std::pow(scale * dt, 2.0 / alpha) * sample_positive_stable(alpha / 2.0, rng);
    return std::sqrt(2.0 * a) * rng.normal_vec(d);
}

Vec sample_relativistic_increment(int d, double alpha, double m, double dt, RandomStream& rng) {
    check_alpha(alpha);
    if (!(m > 0.0)) throw DomainError("relativistic mass must be positive");
    if (dt < 0.0) throw DomainError("dt must be non-negative");
    if (dt == 0.0) return zero_vec(d);
    const double theta = std::pow(m, 2.0 / alpha);
    const double time_scale = std::pow(dt, 2.0 / alpha);
    for (long attempt = 0; attempt < kRejectionCap; ++attempt) {
        const double s = time_scale * sample_positive_stable(alpha / 2.0, rng);
        if (rng.uniform() < std::exp(-theta * s)) return std::sqrt(2.0 * s) * rng.normal_vec(d);
    }
    throw ConvergenceError("relativistic rejection sampler exhausted its attempts (expected acceptance rate " +
                               std::to_string(std::exp(-m * dt)) + ")",
                           std::exp(-m * dt));
}

Vec sample_exact_increment(const LevyModel& model, double dt, RandomStream& rng) {
    const int d = model.dimension();
    const double alpha = model.alpha();
    switch (model.model_class()) {
        case ModelClass::IsotropicStable:
            return sample_isotropic_stable_increment(d, alpha, model.scale()[0], dt, rng);
        case ModelClass::AxisStable: {
            Vec x(d);
            for (int k = 0; k < d; ++k)
                x[k] = sample_stable_increment(alpha, model.scale()[static_cast<std::size_t>(k)], dt, rng);
            return x;
        }
        case ModelClass::RelativisticStable:
            return sample_relativistic_increment(d, alpha, model.mass(), model.scale()[0] * dt, rng);
        case ModelClass::SphericalRadial: {
            if (!model.symmetric()) break;
            // Each antipodal pair (xi, w), (-xi, w) is a one-dimensional stable motion along xi.
            Vec x = zero_vec(d);
            const auto& dirs = model.jump_directions();
            std::vector<bool> used(dirs.size(), false);
            const double c_alpha = stable_constant(alpha);
            for (std::size_t i = 0; i < dirs.size(); ++i) {
                if (used[i]) continue;
                for (std::size_t j = i + 1; j < dirs.size(); ++j) {
                    if (!used[j] && (dirs[i].xi + dirs[j].xi).norm() < 1e-12) {
                        used[j] = true;
                        break;
                    }
                }
                used[i] = true;
                x += sample_stable_increment(alpha, 2.0 * dirs[i].weight * c_alpha, dt, rng) * dirs[i].xi;
            }
            return x;
        }
        default: break;
    }
    throw DomainError("no exact sampler for class " + to_string(model.model_class()));
}

JumpLaw::JumpLaw(const LevyModel& model, double eps) : model_(model), eps_(eps) {
    if (!(eps > 0.0)) throw DomainError("eps_cut must be positive");
    const int d = model.dimension();
    const double mass = model.sphere_mass();
    intensity_ = mass * model.radial_tail(eps);
    if (!std::isfinite(intensity_)) throw DomainError("big-jump intensity is not finite");

    const double m2 = model.radial_moment(2.0, 0.0, eps);
    second_moment_ = mass * m2;
    cov_ = Mat::Zero(d, d);
    if (model.uniform_sphere()) {
        cov_ = Mat::Identity(d, d) * (mass * m2 / static_cast<double>(d));
    } else {
        for (const auto& dir : model.jump_directions()) cov_ += dir.weight * m2 * dir.xi * dir.xi.transpose();
    }
    cov_sqrt_ = symmetric_sqrt(cov_);

    drift_ = zero_vec(d);
    if (!model.symmetric() && eps < 1.0) {
        const double m1 = model.radial_moment(1.0, eps, 1.0);
        for (const auto& dir : model.jump_directions()) drift_ -= dir.weight * m1 * dir.xi;
    }

    double acc = 0.0;
    for (const auto& dir : model.jump_directions()) {
        acc += dir.weight;
        dir_cumulative_.push_back(acc);
    }

    const auto cls = model.model_class();
    if ((cls == ModelClass::TemperedStableSpecial || cls == ModelClass::RelativisticStable) && intensity_ > 0.0) {
        const double hi = model.radial_extent();
        std::vector<double> cdf;
        std::vector<double> log_s;
        double total = 0.0;
        double prev = eps;
        cdf.push_back(0.0);
        log_s.push_back(std::log(eps));
        const double ratio = std::log(hi / eps) / static_cast<double>(kRadiusTableNodes - 1);
        auto rho = [&model](double s) { return model.radial_density(s); };
        for (int j = 1; j < kRadiusTableNodes; ++j) {
            const double s = eps * std::exp(ratio * static_cast<double>(j));
            total += integrate_radial(rho, prev, s).value;
            prev = s;
            if (total > cdf.back()) {
                cdf.push_back(total);
                log_s.push_back(std::log(s));
            }
        }
        for (auto& c : cdf) c /= total;
        cdf.back() = 1.0;
        auto spline = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(std::move(cdf),
                                                                                                 std::move(log_s));
        radius_table_ = std::make_shared<const std::function<double(double)>>(
            [spline](double u) { return std::exp((*spline)(u)); });
    }
}

double JumpLaw::gaussian_validity_ratio() const { return std::sqrt(second_moment_) / eps_; }

double JumpLaw::sample_radius(RandomStream& rng) const {
    const double u = rng.uniform();
    const double alpha = model_.alpha();
    if (radius_table_) return (*radius_table_)(u);
    if (model_.model_class() == ModelClass::TruncatedStable) {
        const double a = std::pow(eps_, -alpha);
        const double b = std::pow(model_.truncation_radius(), -alpha);
        return std::pow(a - u * (a - b), -1.0 / alpha);
    }
    return eps_ * std::pow(u, -1.0 / alpha);
}

Vec JumpLaw::sample_jump(RandomStream& rng) const {
    const int d = model_.dimension();
    Vec xi;
    if (model_.uniform_sphere()) {
        xi = rng.direction(d);
    } else {
        const double u = rng.uniform() * dir_cumulative_.back();
        const auto it = std::upper_bound(dir_cumulative_.begin(), dir_cumulative_.end(), u);
        const auto i = std::min<std::size_t>(static_cast<std::size_t>(it - dir_cumulative_.begin()),
                                             dir_cumulative_.size() - 1);
        xi = model_.jump_directions()[i].xi;
    }
    return sample_radius(rng) * xi;
}

SmallJumpScheme resolve_scheme(const LevyModel& model, SmallJumpScheme requested, const JumpLaw& law) {
    if (requested == SmallJumpScheme::Exact && !model.exact_sampling())
        throw DomainError("class " + to_string(model.model_class()) + " has no exact small-jump sampler");
    if (requested != SmallJumpScheme::Auto) return requested;
    if (model.exact_sampling()) return SmallJumpScheme::Exact;
    return law.gaussian_validity_ratio() >= kGaussianValidityRatio ? SmallJumpScheme::GaussianAR
                                                                     : SmallJumpScheme::Drop;
}

MarginalSampler::MarginalSampler(const LevyModel& model, double eps, SmallJumpScheme scheme)
    : model_(model), law_(model, eps), scheme_(resolve_scheme(model, scheme, law_)) {}

Vec MarginalSampler::sample(double t, RandomStream& rng) const {
    const int d = model_.dimension();
    if (scheme_ == SmallJumpScheme::Exact) return sample_exact_increment(model_, t, rng);
    Vec x = law_.compensation_drift() * t;
    const auto n = rng.poisson(law_.intensity() * t);
    for (std::int64_t j = 0; j < n; ++j) x += law_.sample_jump(rng);
    if (scheme_ == SmallJumpScheme::GaussianAR) x += law_.small_covariance_sqrt() * rng.normal_vec(d) * std::sqrt(t);
    return x;
}

double suggest_eps_cut(const LevyModel& model, double T, double max_expected_jumps) {
    auto expected = [&](double eps) { return T * model.sphere_mass() * model.radial_tail(eps); };
    double hi = 1.0;
    if (expected(hi) > max_expected_jumps) return hi;
    double lo = 1e-12;
    for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-6; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (expected(mid) > max_expected_jumps) lo = mid;
        else hi = mid;
    }
    return hi;
}

std::vector<Vec> JumpPath::values() const {
    std::vector<Vec> out;
    out.reserve(increments.size() + 1);
    Vec x = zero_vec(dimension);
    out.push_back(x);
    for (const auto& dl : increments) {
        x += dl;
        out.push_back(x);
    }
    return out;
}

namespace {

double checked_eps(double eps_cut) {
    if (!(eps_cut > 0.0 && eps_cut <= 1.0)) throw DomainError("eps_cut must lie in (0,1]");
    return eps_cut;
}

}  // namespace

PathSampler::PathSampler(const LevyModel& model, double eps_cut, const PathOptions& options)
    : model_(model), law_(model, checked_eps(eps_cut)), options_(options),
      scheme_(resolve_scheme(model, options.scheme, law_)) {}

JumpPath sample_path(const LevyModel& model, double T, int n_steps, double eps_cut, RandomStream& rng,
                     const PathOptions& options) {
    return PathSampler(model, eps_cut, options).sample(T, n_steps, rng);
}

JumpPath PathSampler::sample(double T, int n_steps, RandomStream& rng) const {
    if (!(T > 0.0)) throw DomainError("horizon must be positive");
    if (n_steps < 1) throw DomainError("n_steps must be positive");
    const LevyModel& model = model_;
    const JumpLaw& law = law_;
    const PathOptions& options = options_;
    const double eps_cut = law.eps();
    const int d = model.dimension();
    JumpPath path;
    path.dimension = d;
    path.horizon = T;
    path.n_cells = n_steps;
    path.eps_cut = eps_cut;
    path.seed = rng.seed();
    path.model = model.to_json();
    path.scheme = scheme_;
    path.compensation_drift = zero_vec(d);

    std::vector<double> regular(static_cast<std::size_t>(n_steps) + 1);
    for (int k = 0; k <= n_steps; ++k) regular[static_cast<std::size_t>(k)] = T * static_cast<double>(k) / n_steps;

    if (path.scheme == SmallJumpScheme::Exact) {
        path.grid = regular;
        for (int k = 0; k < n_steps; ++k) {
            const Vec dl = sample_exact_increment(model, regular[k + 1] - regular[k], rng);
            path.increments.push_back(dl);
            path.small_increments.push_back(dl);
            path.cell.push_back(k);
            path.jump_at_end.push_back(-1);
        }
        return path;
    }

    const double expected = law.intensity() * T;
    if (expected > options.max_expected_jumps)
        throw BudgetError("expected number of big jumps " + std::to_string(expected) + " exceeds the budget",
                          suggest_eps_cut(model, T, options.max_expected_jumps));
    path.compensation_drift = law.compensation_drift();
    if (path.scheme == SmallJumpScheme::Drop) path.drop_error_bound = T * law.small_second_moment();

    const auto n_jumps = rng.poisson(expected);
    std::vector<double> times(static_cast<std::size_t>(n_jumps));
    for (auto& t : times) t = T * rng.uniform();
    std::sort(times.begin(), times.end());
    for (double t : times) path.big_jumps.push_back({t, law.sample_jump(rng), 0});

    path.grid.push_back(0.0);
    std::size_t next_jump = 0;
    const bool gaussian = path.scheme == SmallJumpScheme::GaussianAR;
    auto push_segment = [&](double t0, double t1, int k, int jump) {
        Vec small = law.compensation_drift() * (t1 - t0);
        if (gaussian) small += law.small_covariance_sqrt() * rng.normal_vec(d) * std::sqrt(t1 - t0);
        Vec inc = small;
        if (jump >= 0) {
            inc += path.big_jumps[static_cast<std::size_t>(jump)].z;
            path.big_jumps[static_cast<std::size_t>(jump)].segment = path.increments.size();
        }
        path.grid.push_back(t1);
        path.increments.push_back(inc);
        path.small_increments.push_back(small);
        path.cell.push_back(k);
        path.jump_at_end.push_back(jump);
    };
    for (int k = 0; k < n_steps; ++k) {
        double t0 = regular[static_cast<std::size_t>(k)];
        const double t1 = regular[static_cast<std::size_t>(k) + 1];
        while (next_jump < times.size() && times[next_jump] < t1) {
            const double tj = std::max(times[next_jump], t0);
            push_segment(t0, tj, k, static_cast<int>(next_jump));
            t0 = tj;
            ++next_jump;
        }
        push_segment(t0, t1, k, -1);
    }
    // Jumps falling on T (probability zero) are attached to the last segment.
    while (next_jump < times.size()) {
        const auto last = path.increments.size() - 1;
        path.increments[last] += path.big_jumps[next_jump].z;
        if (path.jump_at_end[last] < 0) path.jump_at_end[last] = static_cast<int>(next_jump);
        path.big_jumps[next_jump].segment = last;
        ++next_jump;
    }
    return path;
}

JumpPath JumpPath::coarsen(int factor) const {
    if (factor < 1 || n_cells % factor != 0) throw DomainError("coarsening factor must divide the cell count");
    JumpPath out = *this;
    if (factor == 1) return out;
    out.n_cells = n_cells / factor;
    out.grid.assign(1, grid.front());
    out.increments.clear();
    out.small_increments.clear();
    out.cell.clear();
    out.jump_at_end.clear();
    Vec small = zero_vec(dimension);
    for (std::size_t k = 0; k < segments(); ++k) {
        const int c = cell[k] / factor;
        small += small_increments[k];
        const bool cell_ends = k + 1 == segments() || cell[k + 1] / factor != c;
        const int jump = jump_at_end[k];
        if (jump >= 0 || cell_ends) {
            Vec inc = small;
            if (jump >= 0) {
                inc += big_jumps[static_cast<std::size_t>(jump)].z;
                out.big_jumps[static_cast<std::size_t>(jump)].segment = out.increments.size();
            }
            out.grid.push_back(grid[k + 1]);
            out.increments.push_back(inc);
            out.small_increments.push_back(small);
            out.cell.push_back(c);
            out.jump_at_end.push_back(jump);
            small = zero_vec(dimension);
        }
    }
    return out;
}

Blob JumpPath::to_blob() const {
    Blob blob;
    blob.meta = {{"type", "JumpPath"},
                 {"dimension", dimension},
                 {"horizon", horizon},
                 {"n_cells", n_cells},
                 {"eps_cut", eps_cut},
                 {"scheme", to_string(scheme)},
                 {"compensation_drift", to_std(compensation_drift)},
                 {"drop_error_bound", drop_error_bound},
                 {"seed", seed},
                 {"model", model}};
    auto flatten = [this](const std::vector<Vec>& v) {
        std::vector<double> out;
        out.reserve(v.size() * static_cast<std::size_t>(dimension));
        for (const auto& x : v)
            for (int k = 0; k < dimension; ++k) out.push_back(x[k]);
        return out;
    };
    blob.add("grid", grid);
    blob.add("increments", flatten(increments));
    blob.add("small_increments", flatten(small_increments));
    blob.add("segment_cell", std::vector<double>(cell.begin(), cell.end()));
    blob.add("segment_jump", std::vector<double>(jump_at_end.begin(), jump_at_end.end()));
    std::vector<double> jt, jv, js;
    for (const auto& j : big_jumps) {
        jt.push_back(j.time);
        for (int k = 0; k < dimension; ++k) jv.push_back(j.z[k]);
        js.push_back(static_cast<double>(j.segment));
    }
    blob.add("jump_times", jt);
    blob.add("jump_vectors", jv);
    blob.add("jump_segments", js);
    return blob;
}

JumpPath JumpPath::from_blob(const Blob& blob) {
    if (blob.meta.value("type", "") != "JumpPath") throw DomainError("blob does not hold a JumpPath");
    JumpPath p;
    p.dimension = blob.meta.at("dimension").get<int>();
    p.horizon = blob.meta.at("horizon").get<double>();
    p.n_cells = blob.meta.at("n_cells").get<int>();
    p.eps_cut = blob.meta.at("eps_cut").get<double>();
    p.scheme = small_jump_scheme_from_string(blob.meta.at("scheme").get<std::string>());
    p.compensation_drift = from_std(blob.meta.at("compensation_drift").get<std::vector<double>>());
    p.drop_error_bound = blob.meta.at("drop_error_bound").get<double>();
    p.seed = blob.meta.at("seed").get<std::uint64_t>();
    p.model = blob.meta.at("model");
    const int d = p.dimension;
    auto unflatten = [d](const std::vector<double>& v) {
        std::vector<Vec> out;
        for (std::size_t i = 0; i + static_cast<std::size_t>(d) <= v.size(); i += static_cast<std::size_t>(d)) {
            Vec x(d);
            for (int k = 0; k < d; ++k) x[k] = v[i + static_cast<std::size_t>(k)];
            out.push_back(x);
        }
        return out;
    };
    p.grid = blob.column("grid");
    p.increments = unflatten(blob.column("increments"));
    p.small_increments = unflatten(blob.column("small_increments"));
    for (double c : blob.column("segment_cell")) p.cell.push_back(static_cast<int>(c));
    for (double c : blob.column("segment_jump")) p.jump_at_end.push_back(static_cast<int>(c));
    const auto& jt = blob.column("jump_times");
    const auto jv = unflatten(blob.column("jump_vectors"));
    const auto& js = blob.column("jump_segments");
    for (std::size_t i = 0; i < jt.size(); ++i) p.big_jumps.push_back({jt[i], jv[i], static_cast<std::size_t>(js[i])});
    return p;
}

CfCheck empirical_cf_check(const LevyModel& model, double t, const std::vector<Vec>& u_probes,
                           std::size_t n_samples, RandomStream& rng, double eps, SmallJumpScheme scheme) {
    if (n_samples < 10000) throw DomainError("empirical_cf_check needs at least 1e4 samples");
    if (t < 0.0) throw DomainError("t must be non-negative");
    const MarginalSampler sampler(model, eps, scheme);
    std::vector<Vec> xs(n_samples);
    for (auto& x : xs) x = t > 0.0 ? sampler.sample(t, rng) : zero_vec(model.dimension());
    CfCheck out;
    out.pass = true;
    const double n = static_cast<double>(n_samples);
    for (const auto& u : u_probes) {
        if (!u.allFinite()) throw DomainError("probe must be finite");
        double sc = 0.0, ss = 0.0, sc2 = 0.0, ss2 = 0.0;
        for (const auto& x : xs) {
            const double ph = u.dot(x);
            const double c = std::cos(ph), s = std::sin(ph);
            sc += c;
            ss += s;
            sc2 += c * c;
            ss2 += s * s;
        }
        const std::complex<double> emp(sc / n, ss / n);
        const std::complex<double> exact = std::exp(-t * model.symbol(u));
        CfProbeResult r;
        r.u = u;
        r.deviation = std::abs(emp - exact);
        const double var = (sc2 / n - (sc / n) * (sc / n)) + (ss2 / n - (ss / n) * (ss / n));
        r.se = std::sqrt(std::max(var, 0.0) / n);
        const double un = u.norm();
        if (sampler.scheme() == SmallJumpScheme::Drop) {
            r.bias_bound = un * std::sqrt(t * sampler.law().small_second_moment());
        } else if (sampler.scheme() == SmallJumpScheme::GaussianAR) {
            // |E e^{iX} - E e^{iG}| <= t * int |<u,z>|^3 nu / 6 over |z| <= eps
            r.bias_bound = t * un * un * un * model.sphere_mass() * model.radial_moment(3.0, 0.0, eps) / 6.0;
        }
        if (r.deviation > 3.0 * r.se + r.bias_bound) out.pass = false;
        if (r.deviation >= out.max_abs_deviation) {
            out.max_abs_deviation = r.deviation;
            out.se_at_max = r.se;
        }
        out.probes.push_back(r);
    }
    return out;
}

}  // namespace levyflow
