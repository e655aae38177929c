#include "levyflow/levy_model.hpp"

#include "levyflow/quadrature.hpp"
#include "levyflow/rng.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace levyflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTemperedExtent = 60.0;
constexpr double kRelativisticExtent = 50.0;
constexpr std::uint64_t kProbeSeed = 0x5EC7012B0D5ULL;

struct ClassName {
    ModelClass cls;
    const char* name;
};

constexpr ClassName kClassNames[] = {
    {ModelClass::IsotropicStable, "IsotropicStable"},
    {ModelClass::AxisStable, "AxisStable"},
    {ModelClass::TruncatedStable, "TruncatedStable"},
    {ModelClass::TemperedStableSpecial, "TemperedStableSpecial"},
    {ModelClass::RelativisticStable, "RelativisticStable"},
    {ModelClass::SphericalRadial, "SphericalRadial"},
};

double one_minus_cos(double x) {
    const double h = std::sin(0.5 * x);
    return 2.0 * h * h;
}

double sin_minus_identity(double x) {
    if (std::abs(x) < 1e-2) {
        const double x2 = x * x;
        return -x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0));
    }
    return std::sin(x) - x;
}

int default_sphere_resolution(int d) { return d == 1 ? 2 : (d == 2 ? 32 : 64); }

// 2^{1-nu} r^nu K_nu(r) / Gamma(nu): tempering factor of the relativistic density, phi(0) = 1.
double relativistic_factor(double r, double nu) {
    if (r <= 0.0) return 1.0;
    if (r > 700.0) return 0.0;
    return std::pow(2.0, 1.0 - nu) * std::pow(r, nu) * boost::math::cyl_bessel_k(nu, r) / std::tgamma(nu);
}

void check_common(int d, double alpha) {
    if (d < 1 || d > kMaxDim) throw DomainError("dimension must be in 1..3");
    if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("alpha must lie in (0,2)");
}

int direction_rank(const std::vector<Direction>& dirs, int d) {
    if (dirs.empty()) return 0;
    Eigen::MatrixXd m(d, static_cast<Eigen::Index>(dirs.size()));
    for (std::size_t i = 0; i < dirs.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = dirs[i].xi;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    lu.setThreshold(1e-10);
    return static_cast<int>(lu.rank());
}

void validate_measure(const std::vector<Direction>& mu, int d, MeasureCheck check) {
    if (mu.empty()) throw DomainError("spherical measure is empty");
    for (const auto& dir : mu) {
        if (dir.xi.size() != d) throw DomainError("direction dimension does not match the model");
        if (!(dir.weight > 0.0) || !std::isfinite(dir.weight)) throw DomainError("spherical weights must be positive");
        if (std::abs(dir.xi.norm() - 1.0) > 1e-12) throw DomainError("spherical directions must be unit vectors");
    }
    if (check == MeasureCheck::Strict && direction_rank(mu, d) < d) throw DomainError("spherical measure is degenerate (directions do not span R^d)");
}

bool is_symmetric(const std::vector<Direction>& dirs) {
    std::vector<bool> used(dirs.size(), false);
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        if (used[i]) continue;
        bool found = false;
        for (std::size_t j = i + 1; j < dirs.size() && !found; ++j) {
            if (used[j]) continue;
            if ((dirs[i].xi + dirs[j].xi).norm() < 1e-12 &&
                std::abs(dirs[i].weight - dirs[j].weight) <= 1e-12 * dirs[i].weight) {
                used[i] = used[j] = true;
                found = true;
            }
        }
        if (!found) return false;
    }
    return true;
}

}  // namespace

std::string to_string(ModelClass c) {
    for (const auto& e : kClassNames)
        if (e.cls == c) return e.name;
    throw DomainError("unknown model class");
}

ModelClass model_class_from_string(const std::string& s) {
    for (const auto& e : kClassNames)
        if (s == e.name) return e.cls;
    throw DomainError("unsupported model class '" + s + "'");
}

double stable_constant(double alpha) {
    if (std::abs(alpha - 1.0) < 1e-14) return std::numbers::pi / 2.0;
    return std::tgamma(1.0 - alpha) * std::cos(std::numbers::pi * alpha / 2.0) / alpha;
}

double sphere_projection_moment(double alpha, int d) {
    const double dd = static_cast<double>(d);
    return std::exp(std::lgamma(dd / 2.0) + std::lgamma((alpha + 1.0) / 2.0) - std::lgamma((dd + alpha) / 2.0)) /
           std::sqrt(std::numbers::pi);
}

std::vector<Direction> quasi_uniform_sphere(int d, int n, double mass) {
    std::vector<Direction> out;
    if (d == 1) {
        out.push_back({Vec::Constant(1, 1.0), mass / 2.0});
        out.push_back({Vec::Constant(1, -1.0), mass / 2.0});
        return out;
    }
    if (n < 2 || n % 2 != 0) throw DomainError("sphere resolution must be an even number >= 2");
    const double w = mass / static_cast<double>(n);
    if (d == 2) {
        for (int j = 0; j < n; ++j) {
            const double th = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
            Vec xi(2);
            xi << std::cos(th), std::sin(th);
            out.push_back({xi, w});
        }
        return out;
    }
    // Fibonacci lattice on the upper hemisphere, mirrored through the origin.
    const int half = n / 2;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    std::vector<Vec> upper;
    for (int j = 0; j < half; ++j) {
        const double z = 1.0 - (static_cast<double>(j) + 0.5) / static_cast<double>(half);
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double th = golden * static_cast<double>(j);
        Vec xi(3);
        xi << rho * std::cos(th), rho * std::sin(th), z;
        upper.push_back(xi / xi.norm());
    }
    for (const auto& xi : upper) out.push_back({xi, w});
    for (const auto& xi : upper) out.push_back({Vec(-xi), w});
    return out;
}

LevyModel LevyModel::isotropic_stable(int d, double alpha, double scale) {
    check_common(d, alpha);
    if (!(scale > 0.0)) throw DomainError("scale must be positive");
    LevyModel m;
    m.dim_ = d;
    m.cls_ = ModelClass::IsotropicStable;
    m.alpha_ = alpha;
    m.scale_ = {scale};
    m.sphere_resolution_ = default_sphere_resolution(d);
    m.finalize();
    return m;
}

LevyModel LevyModel::axis_stable(int d, double alpha, std::vector<double> scales) {
    check_common(d, alpha);
    if (scales.size() == 1 && d > 1) scales.assign(static_cast<std::size_t>(d), scales[0]);
    if (static_cast<int>(scales.size()) != d) throw DomainError("AxisStable needs one scale per axis");
    for (double c : scales)
        if (!(c > 0.0)) throw DomainError("scale must be positive");
    LevyModel m;
    m.dim_ = d;
    m.cls_ = ModelClass::AxisStable;
    m.alpha_ = alpha;
    m.scale_ = std::move(scales);
    m.finalize();
    return m;
}

LevyModel LevyModel::truncated_stable(int d, double alpha, std::vector<Direction> mu, double r, double scale,
                                      MeasureCheck check) {
    check_common(d, alpha);
    validate_measure(mu, d, check);
    if (!(r > 0.0)) throw DomainError("truncation radius must be positive");
    if (!(scale > 0.0)) throw DomainError("scale must be positive");
    LevyModel m;
    m.dim_ = d;
    m.cls_ = ModelClass::TruncatedStable;
    m.alpha_ = alpha;
    m.scale_ = {scale};
    m.radius_ = r;
    m.mu_ = std::move(mu);
    m.finalize();
    return m;
}

LevyModel LevyModel::tempered_stable(int d, double alpha, std::vector<Direction> mu, double scale,
                                     MeasureCheck check) {
    check_common(d, alpha);
    validate_measure(mu, d, check);
    if (!(scale > 0.0)) throw DomainError("scale must be positive");
    LevyModel m;
    m.dim_ = d;
    m.cls_ = ModelClass::TemperedStableSpecial;
    m.alpha_ = alpha;
    m.scale_ = {scale};
    m.mu_ = std::move(mu);
    m.finalize();
    return m;
}

LevyModel LevyModel::relativistic_stable(int d, double alpha, double mass, double scale) {
    check_common(d, alpha);
    if (!(mass > 0.0)) throw DomainError("relativistic mass must be positive");
    if (!(scale > 0.0)) throw DomainError("scale must be positive");
    LevyModel m;
    m.dim_ = d;
    m.cls_ = ModelClass::RelativisticStable;
    m.alpha_ = alpha;
    m.scale_ = {scale};
    m.mass_ = mass;
    m.sphere_resolution_ = default_sphere_resolution(d);
    m.finalize();
    return m;
}

LevyModel LevyModel::spherical_radial(int d, double alpha, std::vector<Direction> mu, double scale,
                                      MeasureCheck check) {
    check_common(d, alpha);
    validate_measure(mu, d, check);
    if (!(scale > 0.0)) throw DomainError("scale must be positive");
    LevyModel m;
    m.dim_ = d;
    m.cls_ = ModelClass::SphericalRadial;
    m.alpha_ = alpha;
    m.scale_ = {scale};
    m.mu_ = std::move(mu);
    m.finalize();
    return m;
}

void LevyModel::finalize() {
    directions_.clear();
    uniform_sphere_ = false;
    const double c_alpha = stable_constant(alpha_);
    switch (cls_) {
        case ModelClass::IsotropicStable:
        case ModelClass::RelativisticStable: {
            const double k = scale_[0] / (c_alpha * sphere_projection_moment(alpha_, dim_));
            directions_ = quasi_uniform_sphere(dim_, sphere_resolution_, k);
            uniform_sphere_ = dim_ > 1;
            break;
        }
        case ModelClass::AxisStable:
            for (int k = 0; k < dim_; ++k) {
                const double w = scale_[static_cast<std::size_t>(k)] / (2.0 * c_alpha);
                directions_.push_back({unit_vec(dim_, k), w});
                directions_.push_back({Vec(-unit_vec(dim_, k)), w});
            }
            break;
        default:
            for (const auto& dir : mu_) directions_.push_back({dir.xi, dir.weight * scale_[0]});
            break;
    }
    sphere_mass_ = 0.0;
    for (const auto& dir : directions_) sphere_mass_ += dir.weight;
    symmetric_ = is_symmetric(directions_);
    degenerate_ = direction_rank(directions_, dim_) < dim_;
}

bool LevyModel::stable_class() const {
    return cls_ == ModelClass::IsotropicStable || cls_ == ModelClass::AxisStable || cls_ == ModelClass::SphericalRadial;
}

bool LevyModel::exact_sampling() const {
    if (cls_ == ModelClass::SphericalRadial) return symmetric_;
    return cls_ == ModelClass::IsotropicStable || cls_ == ModelClass::AxisStable ||
           cls_ == ModelClass::RelativisticStable;
}

double LevyModel::radial_density(double s) const {
    if (!(s > 0.0)) return 0.0;
    const double base = std::pow(s, -1.0 - alpha_);
    switch (cls_) {
        case ModelClass::TruncatedStable: return s <= radius_ ? base : 0.0;
        case ModelClass::TemperedStableSpecial: return std::exp(-s) * base;
        case ModelClass::RelativisticStable:
            return base * relativistic_factor(std::pow(mass_, 1.0 / alpha_) * s, (dim_ + alpha_) / 2.0);
        default: return base;
    }
}

double LevyModel::radial_cutoff() const { return cls_ == ModelClass::TruncatedStable ? radius_ : kInf; }

double LevyModel::radial_extent() const {
    switch (cls_) {
        case ModelClass::TruncatedStable: return radius_;
        case ModelClass::TemperedStableSpecial: return kTemperedExtent;
        case ModelClass::RelativisticStable: return kRelativisticExtent / std::pow(mass_, 1.0 / alpha_);
        default: return kInf;
    }
}

double LevyModel::radial_tail(double s) const {
    if (!(s > 0.0)) return kInf;
    switch (cls_) {
        case ModelClass::TruncatedStable:
            return s >= radius_ ? 0.0 : (std::pow(s, -alpha_) - std::pow(radius_, -alpha_)) / alpha_;
        case ModelClass::TemperedStableSpecial:
        case ModelClass::RelativisticStable: {
            const double ext = radial_extent();
            if (s >= ext) return 0.0;
            return integrate_radial([this](double t) { return radial_density(t); }, s, ext).value;
        }
        default: return std::pow(s, -alpha_) / alpha_;
    }
}

double LevyModel::radial_moment(double p, double lo, double hi) const {
    hi = std::min(hi, radial_extent());
    if (!(hi > lo)) return 0.0;
    if (lo <= 0.0 && p <= alpha_) return kInf;
    const double e = p - alpha_;
    const bool pure_power = stable_class() || cls_ == ModelClass::TruncatedStable;
    if (pure_power) {
        if (std::isinf(hi)) {
            if (e >= 0.0) return kInf;
            return -std::pow(lo, e) / e;
        }
        if (std::abs(e) < 1e-14) return std::log(hi / lo);
        return (std::pow(hi, e) - (lo > 0.0 ? std::pow(lo, e) : 0.0)) / e;
    }
    auto f = [this, p](double t) { return std::pow(t, p) * radial_density(t); };
    double value = integrate_radial(f, lo, hi).value;
    if (lo <= 0.0) value += std::pow(radial_floor(hi), e) / e;
    return value;
}

// int_0^inf (1 - cos(a s)) rho(s) ds for the classes without a closed-form symbol.
double LevyModel::radial_integral_cos(double a) const {
    a = std::abs(a);
    if (a == 0.0) return 0.0;
    if (stable_class()) return stable_constant(alpha_) * std::pow(a, alpha_);
    double hi = radial_extent();
    double tail = 0.0;
    if (cls_ != ModelClass::TruncatedStable) {
        // Past S the oscillating part is below 2 rho(S)/a (monotone profile); keep its mass only.
        double s = std::min(hi, 1.0);
        while (s < hi && 2.0 * radial_density(s) / a > 1e-12) s *= 2.0;
        if (s < hi) {
            tail = radial_tail(s);
            hi = s;
        }
    }
    auto f = [this, a](double s) { return one_minus_cos(a * s) * radial_density(s); };
    const auto q = integrate_radial(f, 0.0, hi, a);
    const double sf = radial_floor(hi);
    return q.value + tail + 0.5 * a * a * std::pow(sf, 2.0 - alpha_) / (2.0 - alpha_);
}

// int_0^inf (sin(a s) - a s 1{s <= 1}) rho(s) ds
double LevyModel::radial_integral_sin(double a) const {
    if (a == 0.0) return 0.0;
    const double aa = std::abs(a);
    auto near = [this, a](double s) { return sin_minus_identity(a * s) * radial_density(s); };
    auto far = [this, a](double s) { return std::sin(a * s) * radial_density(s); };
    const double one = std::min(1.0, radial_extent());
    double value = integrate_radial(near, 0.0, one, aa).value;
    const double ext = radial_extent();
    if (ext > 1.0) {
        double hi = ext;
        double tail = 0.0;
        if (std::isinf(ext)) {
            hi = std::max(64.0, 64.0 / aa);
            // Two terms of integration by parts for the pure power tail.
            const double r = radial_density(hi);
            const double dr = -(1.0 + alpha_) * r / hi;
            tail = std::cos(a * hi) * r / a - std::sin(a * hi) * dr / (a * a);
        }
        value += integrate_radial(far, 1.0, hi, aa).value + tail;
    }
    return value;
}

double LevyModel::symbol_real(const Vec& u) const {
    if (u.size() != dim_) throw DomainError("symbol argument has the wrong dimension");
    if (!u.allFinite()) throw DomainError("symbol argument must be finite");
    switch (cls_) {
        case ModelClass::IsotropicStable: return scale_[0] * std::pow(u.norm(), alpha_);
        case ModelClass::AxisStable: {
            double s = 0.0;
            for (int k = 0; k < dim_; ++k) s += scale_[static_cast<std::size_t>(k)] * std::pow(std::abs(u[k]), alpha_);
            return s;
        }
        case ModelClass::RelativisticStable: {
            const double x = u.squaredNorm() / std::pow(mass_, 2.0 / alpha_);
            return scale_[0] * mass_ * std::expm1(0.5 * alpha_ * std::log1p(x));
        }
        default: break;
    }
    std::vector<std::pair<double, double>> cache;
    double total = 0.0;
    for (const auto& dir : directions_) {
        const double a = std::abs(u.dot(dir.xi));
        double phi = -1.0;
        for (const auto& c : cache)
            if (c.first == a) phi = c.second;
        if (phi < 0.0) {
            phi = radial_integral_cos(a);
            cache.emplace_back(a, phi);
        }
        total += dir.weight * phi;
    }
    return total;
}

std::complex<double> LevyModel::symbol(const Vec& u) const {
    const double re = symbol_real(u);
    double im = 0.0;
    if (!symmetric_) {
        for (const auto& dir : directions_) im -= dir.weight * radial_integral_sin(u.dot(dir.xi));
    }
    return {re, im};
}

nlohmann::json LevyModel::to_json() const {
    nlohmann::json j;
    j["class"] = to_string(cls_);
    j["dimension"] = dim_;
    j["alpha"] = alpha_;
    j["scale"] = scale_;
    if (cls_ == ModelClass::TruncatedStable) j["truncation_radius"] = radius_;
    if (cls_ == ModelClass::RelativisticStable) j["mass"] = mass_;
    if (cls_ == ModelClass::IsotropicStable || cls_ == ModelClass::RelativisticStable)
        j["sphere_resolution"] = sphere_resolution_;
    if (degenerate_) j["allow_degenerate"] = true;
    if (!mu_.empty()) {
        nlohmann::json dirs = nlohmann::json::array();
        nlohmann::json weights = nlohmann::json::array();
        for (const auto& dir : mu_) {
            dirs.push_back(to_std(dir.xi));
            weights.push_back(dir.weight);
        }
        j["spherical_measure"] = {{"directions", dirs}, {"weights", weights}};
    }
    return j;
}

LevyModel LevyModel::from_json(const nlohmann::json& j) {
    const ModelClass cls = model_class_from_string(j.at("class").get<std::string>());
    const int d = j.at("dimension").get<int>();
    const double alpha = j.at("alpha").get<double>();
    std::vector<double> scale{1.0};
    if (j.contains("scale")) {
        if (j["scale"].is_array()) scale = j["scale"].get<std::vector<double>>();
        else scale = {j["scale"].get<double>()};
    }
    if (scale.empty()) throw DomainError("scale must not be empty");
    std::vector<Direction> mu;
    if (j.contains("spherical_measure")) {
        const auto& sm = j["spherical_measure"];
        if (sm.contains("uniform")) {
            const double total = sm.value("total_mass", 1.0);
            mu = quasi_uniform_sphere(d, sm["uniform"].get<int>(), total);
        } else {
            const auto dirs = sm.at("directions").get<std::vector<std::vector<double>>>();
            const auto weights = sm.at("weights").get<std::vector<double>>();
            if (dirs.size() != weights.size()) throw DomainError("directions and weights differ in length");
            for (std::size_t i = 0; i < dirs.size(); ++i) mu.push_back({from_std(dirs[i]), weights[i]});
        }
    } else if (cls == ModelClass::TruncatedStable || cls == ModelClass::TemperedStableSpecial ||
               cls == ModelClass::SphericalRadial) {
        mu = quasi_uniform_sphere(d, default_sphere_resolution(d), 1.0);
    }
    const MeasureCheck check = j.value("allow_degenerate", false) ? MeasureCheck::AllowDegenerate : MeasureCheck::Strict;
    LevyModel m;
    switch (cls) {
        case ModelClass::IsotropicStable: m = isotropic_stable(d, alpha, scale[0]); break;
        case ModelClass::AxisStable: m = axis_stable(d, alpha, scale); break;
        case ModelClass::TruncatedStable:
            m = truncated_stable(d, alpha, mu, j.value("truncation_radius", 1.0), scale[0], check);
            break;
        case ModelClass::TemperedStableSpecial: m = tempered_stable(d, alpha, mu, scale[0], check); break;
        case ModelClass::RelativisticStable: m = relativistic_stable(d, alpha, j.at("mass").get<double>(), scale[0]); break;
        case ModelClass::SphericalRadial: m = spherical_radial(d, alpha, mu, scale[0], check); break;
    }
    if (j.contains("sphere_resolution") &&
        (cls == ModelClass::IsotropicStable || cls == ModelClass::RelativisticStable)) {
        m.sphere_resolution_ = j["sphere_resolution"].get<int>();
        m.finalize();
    }
    return m;
}

SectorBounds check_sector_bounds(const LevyModel& model, double M, int n_probes) {
    if (!(M > 0.0)) throw DomainError("M must be positive");
    if (n_probes < 100) throw DomainError("n_probes must be at least 100");
    const int d = model.dimension();
    RandomStream rng(kProbeSeed);
    SectorBounds out;
    out.c1 = kInf;
    out.c2 = 0.0;
    for (int p = 0; p < n_probes; ++p) {
        const Vec dir = p < d ? unit_vec(d, p) : rng.direction(d);
        const double radius = M * std::pow(100.0, rng.uniform());
        const double ratio = model.symbol_real(dir * radius) / std::pow(radius, model.alpha());
        out.c1 = std::min(out.c1, ratio);
        out.c2 = std::max(out.c2, ratio);
    }
    out.pass = out.c1 > 0.0 && std::isfinite(out.c2) && std::isfinite(out.c2 / out.c1);
    return out;
}

double small_jump_moment(const LevyModel& model, double sigma) {
    if (sigma <= model.alpha()) return kInf;
    const double hi = std::min(1.0, model.radial_extent());
    auto f = [&model, sigma](double s) { return std::pow(s, sigma) * model.radial_density(s); };
    double radial = integrate_radial(f, 0.0, hi).value;
    radial += std::pow(radial_floor(hi), sigma - model.alpha()) / (sigma - model.alpha());
    return model.sphere_mass() * radial;
}

DominationResult dominates_truncated(const LevyModel& model) {
    DominationResult out;
    if (model.model_class() == ModelClass::AxisStable) return out;
    out.applicable = true;
    const double r_ref = std::min(1.0, model.radial_cutoff());
    out.reference_radius = r_ref;
    switch (model.model_class()) {
        case ModelClass::TemperedStableSpecial: out.reference_scale = std::exp(-r_ref); break;
        case ModelClass::RelativisticStable:
            out.reference_scale =
                relativistic_factor(std::pow(model.mass(), 1.0 / model.alpha()) * r_ref,
                                    (model.dimension() + model.alpha()) / 2.0);
            break;
        default: out.reference_scale = 1.0; break;
    }
    double min_ratio = kInf;
    constexpr int kGrid = 400;
    for (int i = 0; i <= kGrid; ++i) {
        const double s = r_ref * std::pow(10.0, -8.0 * static_cast<double>(kGrid - i) / kGrid);
        const double ratio = model.radial_density(s) / std::pow(s, -1.0 - model.alpha());
        min_ratio = std::min(min_ratio, ratio);
    }
    out.margin = min_ratio - out.reference_scale;
    out.pass = !model.degenerate() && out.reference_scale > 0.0 && out.margin >= -1e-12 * out.reference_scale;
    return out;
}

}  // namespace levyflow
