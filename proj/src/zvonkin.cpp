#include "levyflow/zvonkin.hpp"

#include "levyflow/parallel.hpp"
#include "levyflow/quadrature.hpp"
#include "levyflow/rng.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

namespace levyflow {

namespace {

double spectral_norm(const Mat& m) {
    if (m.rows() == 1 || m.cols() == 1) return m.norm();
    return Eigen::JacobiSVD<Mat>(m).singularValues()[0];
}

constexpr double kGate = 1.0 / 3.0;

}  // namespace

ZvonkinTransform::ZvonkinTransform(GridFunction u, double lambda, double gamma, DriftSpec drift)
    : u_(std::move(u)), lambda_(lambda), gamma_(gamma), drift_(std::move(drift)) {
    if (u_.cols() != 1 || u_.rows() != u_.lattice().dim) throw DomainError("u must be a d-vector field");
    du_ = lattice_gradient(u_);
    du_.provenance() = u_.provenance();
    du_.provenance().producer = "lattice_gradient";
    c_lambda_ = du_.sup_norm();
    if (!(c_lambda_ < kGate)) throw DomainError("transform gate failed: ||Du||_0 = " + std::to_string(c_lambda_) + " >= 1/3");
}

ZvonkinTransform ZvonkinTransform::synthetic(const Lattice& lattice, const std::function<Vec(const Vec&)>& u,
                                             double lambda, double gamma, const DriftSpec& drift) {
    GridFunction g = GridFunction::sample_vector(lattice, lattice.dim, u);
    g.provenance().producer = "synthetic";
    return ZvonkinTransform(std::move(g), lambda, gamma, drift);
}

Vec ZvonkinTransform::u_at(const Vec& x) const {
    double buf[kMaxDim * kMaxDim];
    const bool cl = u_.interpolate(x, buf);
    evaluations_->fetch_add(1, std::memory_order_relaxed);
    if (cl) clamped_->fetch_add(1, std::memory_order_relaxed);
    Vec v(dimension());
    for (int k = 0; k < dimension(); ++k) v[k] = buf[k];
    return v;
}

Mat ZvonkinTransform::du_at(const Vec& x) const { return du_.interpolate_mat(x); }

double ZvonkinTransform::leakage() const {
    const auto n = evaluations_->load();
    return n == 0 ? 0.0 : static_cast<double>(clamped_->load()) / static_cast<double>(n);
}

nlohmann::json ZvonkinTransform::to_json() const {
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& s : curve_)
        curve.push_back({{"lambda", s.lambda}, {"c_lambda", s.c_lambda}, {"refused", s.refused},
                         {"iterations", s.iterations}, {"contraction", s.contraction}, {"seconds", s.seconds}});
    return {{"lambda", lambda_}, {"c_lambda", c_lambda_}, {"gamma", gamma_}, {"drift", drift_.to_json()},
            {"curve", curve}, {"info", info_}};
}

ZvonkinTransform ZvonkinTransform::from_blobs(const Blob& u, const nlohmann::json& meta) {
    ZvonkinTransform t(GridFunction::from_blob(u), meta.at("lambda").get<double>(), meta.at("gamma").get<double>(),
                       DriftSpec::from_json(meta.at("drift")));
    if (meta.contains("info")) t.info_ = meta["info"];
    return t;
}

ZvonkinTransform build_transform(const LevyModel& model, const DriftSpec& b, const TransformOptions& options) {
    const double alpha = model.alpha();
    const double beta = b.beta();
    const int d = model.dimension();
    if (b.dimension() != d) throw DomainError("drift and model dimensions differ");
    if (options.resolvent.lattice.dim != d) throw DomainError("lattice and model dimensions differ");
    if (!options.allow_counterexample && !(alpha >= 1.0 && beta > 1.0 - alpha / 2.0))
        throw DomainError("transform needs alpha >= 1 and beta > 1 - alpha/2 (use allow_counterexample to override)");
    ResolventOptions ropt = options.resolvent;
    ropt.beta = beta;
    ropt.check_regime = !options.allow_counterexample;
    const double gamma = alpha - 1.0 + effective_beta(alpha, beta);

    std::vector<Field> rhs;
    for (int j = 0; j < d; ++j) rhs.emplace_back([b, j](const Vec& x) { return b(x)[j]; }, b.sup_norm(), "b");

    std::vector<LambdaStep> curve;
    for (double lambda : options.lambda_schedule) {
        LambdaStep step;
        step.lambda = lambda;
        const auto start = std::chrono::steady_clock::now();
        try {
            ResolventSolution s = resolvent_holder_drift(model, b, rhs, lambda, ropt);
            step.c_lambda = s.dv.sup_norm();
            step.iterations = s.iterations;
            step.contraction = s.contraction;
            step.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            curve.push_back(step);
            if (step.c_lambda < kGate) {
                ZvonkinTransform t(std::move(s.v), lambda, gamma, b);
                t.curve() = curve;
                t.info() = s.diagnostics();
                return t;
            }
        } catch (const BudgetError& e) {
            step.refused = true;
            step.c_lambda = std::numeric_limits<double>::infinity();
            step.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            curve.push_back(step);
        }
    }
    const double last = curve.empty() ? 0.0 : curve.back().c_lambda;
    throw ScheduleExhausted("lambda schedule exhausted without ||Du||_0 < 1/3", curve, last);
}

Vec psi_forward(const ZvonkinTransform& t, const Vec& x) { return x + t.u_at(x); }

InverseResult psi_inverse_detail(const ZvonkinTransform& t, const Vec& y, double tol) {
    InverseResult r;
    Vec x = y - t.u_at(y);
    double prev_step = (x - y).norm();
    const double stop = tol * (1.0 - t.c_lambda());
    if (prev_step < stop) {
        r.x = x;
        r.iterations = 1;
        return r;
    }
    for (int it = 2; it <= 100; ++it) {
        const Vec next = y - t.u_at(x);
        const double step = (next - x).norm();
        if (prev_step > 1e-13 * (1.0 + x.norm())) r.max_ratio = std::max(r.max_ratio, step / prev_step);
        x = next;
        r.iterations = it;
        if (step < stop) {
            r.x = x;
            return r;
        }
        prev_step = step;
    }
    throw ConvergenceError("psi inverse did not converge in 100 iterations", prev_step);
}

Vec psi_inverse(const ZvonkinTransform& t, const Vec& y, double tol) { return psi_inverse_detail(t, y, tol).x; }

Mat dpsi_inverse(const ZvonkinTransform& t, const Vec& z) {
    const Mat a = t.du_at(psi_inverse(t, z));
    const int d = t.dimension();
    Mat sum = identity_mat(d);
    Mat term = identity_mat(d);
    for (int k = 1; k < 200; ++k) {
        term = Mat(-term * a);
        sum += term;
        if (spectral_norm(term) < 1e-16) break;
    }
    return sum;
}

double dpsi_inverse_holder(const ZvonkinTransform& t, int probe_pairs, std::uint64_t seed) {
    const Lattice& lat = t.u().lattice();
    const int d = lat.dim;
    const double half = lat.half_width / 3.0;
    const double min_sep = 2.0 * lat.spacing();
    RandomStream rng(seed);
    double best = 0.0;
    for (int p = 0; p < probe_pairs; ++p) {
        Vec a(d), b(d);
        for (int k = 0; k < d; ++k) {
            a[k] = (2.0 * rng.uniform() - 1.0) * half;
            b[k] = (2.0 * rng.uniform() - 1.0) * half;
        }
        // Half of the pairs are short range, where the seminorm is usually attained.
        if (p % 2 == 1) b = a + (b - a) * (4.0 * min_sep / std::max((b - a).norm(), 1e-300));
        const double dist = (a - b).norm();
        if (dist < min_sep) continue;
        const double diff = spectral_norm(Mat(dpsi_inverse(t, a) - dpsi_inverse(t, b)));
        best = std::max(best, diff / std::pow(dist, t.gamma()));
    }
    return best;
}

AuxiliaryCoeffs::AuxiliaryCoeffs(std::shared_ptr<const ZvonkinTransform> t, const LevyModel& model, double r)
    : t_(std::move(t)), model_(model), r_(r) {
    if (!(r > 0.0 && r <= 1.0)) throw DomainError("auxiliary cutoff r must lie in (0, 1]");
    if (model.dimension() != t_->dimension()) throw DomainError("model and transform dimensions differ");
}

Vec AuxiliaryCoeffs::g(const Vec& y, const Vec& z) const {
    const Vec x = psi_inverse(*t_, y);
    return psi_forward(*t_, Vec(x + z)) - y;
}

Vec AuxiliaryCoeffs::mid_jump_mean(double rho) const {
    Vec m = zero_vec(model_.dimension());
    if (model_.symmetric() || rho >= 1.0) return m;
    const double m1 = model_.radial_moment(1.0, rho, 1.0);
    for (const auto& dir : model_.jump_directions()) m += dir.weight * m1 * dir.xi;
    return m;
}

const GridFunction& AuxiliaryCoeffs::compensator_table(double rho) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = tables_.find(rho);
    if (it != tables_.end()) return *it->second;

    const GridFunction& u = t_->u();
    const GridFunction& du = t_->du();
    const Lattice& lat = u.lattice();
    const int d = lat.dim;
    const double h = lat.spacing();
    const double outer = std::min(2.0 * std::sqrt(static_cast<double>(d)) * lat.half_width + 1.0, model_.radial_extent());
    const double tail = outer < model_.radial_extent() ? model_.radial_tail(outer) : 0.0;
    const double lo = std::max(rho, h);
    const double m1 = rho < h ? model_.radial_moment(1.0, rho, h) : 0.0;
    const double m2 = rho < h ? model_.radial_moment(2.0, rho, h) : 0.0;
    const auto& dirs = model_.jump_directions();

    auto table = std::make_shared<GridFunction>(lat, d);
    parallel_for(lat.size(), [&](std::size_t i) {
        const Vec x = lat.node(i);
        for (int j = 0; j < d; ++j) {
            const double ux = u.at(i, j);
            double total = 0.0;
            for (const auto& dir : dirs) {
                const Vec& th = dir.xi;
                double acc = 0.0;
                if (rho < h) {
                    double slope = 0.0;
                    for (int a = 0; a < d; ++a) slope += th[a] * du.at(i, j * d + a);
                    const double q = (u.interpolate(Vec(x + h * th), j) + u.interpolate(Vec(x - h * th), j) - 2.0 * ux) / (h * h);
                    acc += slope * m1 + 0.5 * q * m2;
                }
                if (outer > lo) {
                    acc += integrate_radial([&](double s) {
                        return (u.interpolate(Vec(x + s * th), j) - ux) * model_.radial_density(s);
                    }, lo, outer, std::numbers::pi / h).value;
                }
                acc += (u.interpolate(Vec(x + outer * th), j) - ux) * tail;
                total += dir.weight * acc;
            }
            table->at(i, j) = total;
        }
    });
    table->provenance().producer = "jump_compensator";
    table->provenance().extra["rho"] = rho;
    tables_[rho] = table;
    return *table;
}

Vec AuxiliaryCoeffs::jump_compensator_at(const Vec& x, double rho) const {
    return compensator_table(rho).interpolate_vec(x);
}

Vec AuxiliaryCoeffs::btilde(const Vec& y) const {
    const Vec x = psi_inverse(*t_, y);
    return t_->lambda() * t_->u_at(x) - jump_compensator_at(x, r_) - mid_jump_mean(r_);
}

double AuxiliaryCoeffs::small_jump_lipschitz(int pairs, std::uint64_t seed) const {
    const Lattice& lat = t_->u().lattice();
    const int d = lat.dim;
    const double half = lat.half_width / 3.0;
    RandomStream rng(seed);
    double best = 0.0;
    for (int p = 0; p < pairs; ++p) {
        Vec y(d), y2(d);
        for (int k = 0; k < d; ++k) {
            y[k] = (2.0 * rng.uniform() - 1.0) * half;
            y2[k] = y[k] + (2.0 * rng.uniform() - 1.0) * 0.5;
        }
        const double dist2 = (y - y2).squaredNorm();
        if (dist2 < 1e-12) continue;
        const Vec x = psi_inverse(*t_, y), x2 = psi_inverse(*t_, y2);
        const Vec ux = t_->u_at(x), ux2 = t_->u_at(x2);
        double total = 0.0;
        for (const auto& dir : model_.jump_directions()) {
            const Vec th = dir.xi;
            total += dir.weight * integrate_radial([&](double s) {
                const Vec diff = (t_->u_at(Vec(x + s * th)) - ux) - (t_->u_at(Vec(x2 + s * th)) - ux2);
                return diff.squaredNorm() * model_.radial_density(s);
            }, 0.0, 1.0).value;
        }
        best = std::max(best, total / dist2);
    }
    return best;
}

double AuxiliaryCoeffs::btilde_lipschitz(int pairs, std::uint64_t seed) const {
    const Lattice& lat = t_->u().lattice();
    const int d = lat.dim;
    const double half = lat.half_width / 3.0;
    const double min_sep = 2.0 * lat.spacing();
    RandomStream rng(seed);
    double best = 0.0;
    for (int p = 0; p < pairs; ++p) {
        Vec y(d), y2(d);
        for (int k = 0; k < d; ++k) {
            y[k] = (2.0 * rng.uniform() - 1.0) * half;
            y2[k] = (2.0 * rng.uniform() - 1.0) * half;
        }
        const double dist = (y - y2).norm();
        if (dist < min_sep) continue;
        best = std::max(best, (btilde(y) - btilde(y2)).norm() / dist);
    }
    return best;
}

}  // namespace levyflow
