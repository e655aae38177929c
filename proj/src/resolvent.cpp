#include "levyflow/resolvent.hpp"

#include "levyflow/parallel.hpp"
#include "levyflow/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

namespace levyflow {

double effective_beta(double alpha, double beta) {
    if (alpha + beta >= 2.0) return std::min(beta, 1.5 - 0.75 * alpha);
    return beta;
}

namespace {

struct TimeNode {
    double t;
    double w;
};

// Gauss-Legendre on each dyadic level below T*, weights rescaled so every level integrates
// e^{-lambda t} exactly.
std::vector<TimeNode> time_mesh(double t_star, double lambda, int levels, int gauss_nodes) {
    const GaussRule& rule = gauss_legendre(gauss_nodes);
    std::vector<TimeNode> nodes;
    for (int j = levels - 1; j >= 0; --j) {
        const double a = t_star * std::ldexp(1.0, -j - 1);
        const double b = 2.0 * a;
        const std::size_t first = nodes.size();
        double raw = 0.0;
        for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
            const double t = a + 0.5 * (b - a) * (1.0 + rule.nodes[g]);
            const double w = 0.5 * (b - a) * rule.weights[g] * std::exp(-lambda * t);
            nodes.push_back({t, w});
            raw += w;
        }
        const double exact = (std::exp(-lambda * a) - std::exp(-lambda * b)) / lambda;
        for (std::size_t i = first; i < nodes.size(); ++i) nodes[i].w *= exact / raw;
    }
    return nodes;
}

long ipow(long b, int e) {
    long r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

}  // namespace

OccupationKernel::OccupationKernel(const LevyModel& model, const Vec& k, double lambda, const ResolventOptions& opt)
    : lattice_(opt.lattice), dim_(opt.lattice.dim), lambda_(lambda) {
    if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
    if (model.dimension() != dim_) throw DomainError("model and lattice dimensions differ");
    if (k.size() != dim_) throw DomainError("drift vector has the wrong dimension");
    if (opt.batches < 1 || opt.n_mc < static_cast<std::size_t>(opt.batches)) throw DomainError("need at least one draw per batch");
    if (opt.levels < 1) throw DomainError("need at least one time level");
    if (!(opt.tol > 0.0)) throw DomainError("tolerance must be positive");

    const double h = lattice_.spacing();
    const double window = opt.kernel_half_width > 0.0 ? opt.kernel_half_width : 2.0 * lattice_.half_width;
    half_cells_ = std::max(1, static_cast<int>(std::ceil(window / h)));
    const int M = half_cells_;

    const double target = 0.1 * opt.tol;
    t_star_ = std::max(std::log(1.0 / (target * lambda)), std::log(1e4)) / lambda;
    t_min_ = t_star_ * std::ldexp(1.0, -opt.levels);
    const std::vector<TimeNode> mesh = time_mesh(t_star_, lambda, opt.levels, opt.gauss_nodes);
    const double origin_mass = -std::expm1(-lambda * t_min_) / lambda;

    const bool self_similar = model.stable_class() && model.symmetric() && model.exact_sampling();
    std::unique_ptr<MarginalSampler> sampler;
    if (!self_similar) sampler = std::make_unique<MarginalSampler>(model, opt.eps, opt.scheme);
    std::vector<double> scale(mesh.size());
    for (std::size_t j = 0; j < mesh.size(); ++j) scale[j] = std::pow(mesh[j].t, 1.0 / model.alpha());

    RandomStream root(opt.seed);
    seed_ = root.bits();
    const int B = opt.batches;
    const std::size_t per_batch = opt.n_mc / static_cast<std::size_t>(B);
    const long side = 2L * M + 1;
    const long cells = ipow(side, dim_);
    const long ext = static_cast<long>(lattice_.nodes) + 2L * M;
    batches_.resize(static_cast<std::size_t>(B));

    parallel_for(static_cast<std::size_t>(B), [&](std::size_t b) {
        RandomStream rng(derive_seed(seed_, b));
        std::vector<double> dense(static_cast<std::size_t>(cells), 0.0);
        Batch& batch = batches_[b];
        const double inv_n = 1.0 / static_cast<double>(per_batch);
        auto deposit = [&](const Vec& y, double w) {
            long base = 0;
            long stride = 1;
            double frac[kMaxDim];
            bool near = true;
            for (int a = 0; a < dim_; ++a) {
                const double p = y[a] / h;
                const double fl = std::floor(p);
                if (!(fl >= -M && fl + 1 <= M)) {
                    near = false;
                    break;
                }
                base += (static_cast<long>(fl) + M) * stride;
                frac[a] = p - fl;
                stride *= side;
            }
            if (!near) {
                batch.far_points.push_back(y);
                batch.far_weights.push_back(w);
                return;
            }
            for (int c = 0; c < (1 << dim_); ++c) {
                double wc = w;
                long off = base;
                long st = 1;
                for (int a = 0; a < dim_; ++a) {
                    if (c & (1 << a)) {
                        wc *= frac[a];
                        off += st;
                    } else {
                        wc *= 1.0 - frac[a];
                    }
                    st *= side;
                }
                dense[static_cast<std::size_t>(off)] += wc;
            }
        };

        for (std::size_t s = 0; s < per_batch; ++s) {
            if (self_similar) {
                const Vec l1 = sample_exact_increment(model, 1.0, rng);
                for (std::size_t j = 0; j < mesh.size(); ++j) deposit(mesh[j].t * k + scale[j] * l1, mesh[j].w * inv_n);
            } else {
                Vec l = zero_vec(dim_);
                double prev = 0.0;
                for (const TimeNode& node : mesh) {
                    l += sampler->sample(node.t - prev, rng);
                    prev = node.t;
                    deposit(node.t * k + l, node.w * inv_n);
                }
            }
        }
        deposit(zero_vec(dim_), origin_mass);

        const std::size_t n_far = batch.far_points.size();
        if (n_far > opt.far_cap && opt.far_cap > 0) {
            double total = 0.0;
            for (double w : batch.far_weights) total += w;
            const double stride = static_cast<double>(n_far) / static_cast<double>(opt.far_cap);
            const double start = rng.uniform() * stride;
            std::vector<Vec> pts;
            std::vector<double> wts;
            double kept = 0.0;
            for (std::size_t j = 0;; ++j) {
                const auto idx = static_cast<std::size_t>(start + static_cast<double>(j) * stride);
                if (idx >= n_far) break;
                pts.push_back(batch.far_points[idx]);
                wts.push_back(batch.far_weights[idx]);
                kept += batch.far_weights[idx];
            }
            for (double& w : wts) w *= total / kept;
            batch.far_points = std::move(pts);
            batch.far_weights = std::move(wts);
        }

        for (long c = 0; c < cells; ++c) {
            const double w = dense[static_cast<std::size_t>(c)];
            if (w == 0.0) continue;
            long rem = c;
            long off = 0;
            long est = 1;
            for (int a = 0; a < dim_; ++a) {
                const long m = rem % side - M;
                rem /= side;
                off += m * est;
                est *= ext;
            }
            batch.near.emplace_back(off, w);
        }
    });
}

std::size_t OccupationKernel::far_points() const {
    std::size_t n = 0;
    for (const auto& b : batches_) n += b.far_points.size();
    return n;
}

OccupationKernel::Output OccupationKernel::apply(const Evaluator& f, int components) const {
    if (components < 1 || components > kMaxDim * kMaxDim) throw DomainError("bad component count");
    const int M = half_cells_;
    const int n = lattice_.nodes;
    const long ext = static_cast<long>(n) + 2L * M;
    const long ext_size = ipow(ext, dim_);
    const double h = lattice_.spacing();
    const auto m = static_cast<std::size_t>(components);

    std::vector<double> F(static_cast<std::size_t>(ext_size) * m);
    std::vector<char> clamped(static_cast<std::size_t>(ext_size), 0);
    parallel_for(static_cast<std::size_t>(ext_size), [&](std::size_t e) {
        Vec x(dim_);
        std::size_t rem = e;
        for (int a = 0; a < dim_; ++a) {
            const long ia = static_cast<long>(rem % static_cast<std::size_t>(ext)) - M;
            rem /= static_cast<std::size_t>(ext);
            x[a] = lattice_.coordinate(static_cast<int>(ia));
        }
        clamped[e] = f(x, &F[e * m]) ? 1 : 0;
    });

    Output out;
    out.values.assign(batches_.size(), std::vector<double>(lattice_.size() * m, 0.0));
    std::vector<double> oob(batches_.size() * lattice_.size(), 0.0);
    std::vector<double> mass(batches_.size() * lattice_.size(), 0.0);
    for (std::size_t b = 0; b < batches_.size(); ++b) {
        const Batch& batch = batches_[b];
        parallel_for(lattice_.size(), [&](std::size_t i) {
            const auto idx = lattice_.index(i);
            long base = 0;
            long est = 1;
            for (int a = 0; a < dim_; ++a) {
                base += (idx[static_cast<std::size_t>(a)] + M) * est;
                est *= ext;
            }
            double acc[kMaxDim * kMaxDim] = {};
            double lost = 0.0, total = 0.0;
            for (const auto& [off, w] : batch.near) {
                const auto e = static_cast<std::size_t>(base + off);
                const double* fv = &F[e * m];
                for (std::size_t c = 0; c < m; ++c) acc[c] += w * fv[c];
                if (clamped[e]) lost += w;
                total += w;
            }
            const Vec x = lattice_.node(i);
            double buf[kMaxDim * kMaxDim];
            for (std::size_t j = 0; j < batch.far_points.size(); ++j) {
                const double w = batch.far_weights[j];
                if (f(x + batch.far_points[j], buf)) lost += w;
                for (std::size_t c = 0; c < m; ++c) acc[c] += w * buf[c];
                total += w;
            }
            for (std::size_t c = 0; c < m; ++c) out.values[b][i * m + c] = acc[c];
            oob[b * lattice_.size() + i] = lost;
            mass[b * lattice_.size() + i] = total;
        });
    }
    double lost = 0.0, total = 0.0;
    for (std::size_t j = 0; j < oob.size(); ++j) {
        lost += oob[j];
        total += mass[j];
    }
    out.out_of_box_fraction = total > 0.0 ? lost / total : 0.0;
    (void)h;
    return out;
}

namespace {

double field_norm(const std::vector<Field>& f, const Lattice& lat) {
    double sampled = 0.0, bound = 0.0;
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const Vec x = lat.node(i);
        double s = 0.0;
        for (const Field& fj : f) s += fj(x) * fj(x);
        sampled = std::max(sampled, std::sqrt(s));
    }
    for (const Field& fj : f)
        if (std::isfinite(fj.bound())) bound = std::max(bound, fj.bound());
    if (f.size() == 1 && std::isfinite(f[0].bound())) return f[0].bound();
    return std::max(sampled, bound);
}

// Mean over batches, standard errors, and the lattice gradient with its own batch errors.
void assemble(const OccupationKernel::Output& out, int m, const Lattice& lat, ResolventSolution& s) {
    const std::size_t B = out.values.size();
    const std::size_t nv = lat.size() * static_cast<std::size_t>(m);
    GridFunction v(lat, m);
    std::vector<double> s2(nv, 0.0);
    for (const auto& vb : out.values)
        for (std::size_t j = 0; j < nv; ++j) v.values()[j] += vb[j];
    for (double& x : v.values()) x /= static_cast<double>(B);
    for (const auto& vb : out.values)
        for (std::size_t j = 0; j < nv; ++j) s2[j] += (vb[j] - v.values()[j]) * (vb[j] - v.values()[j]);
    v.standard_error().resize(nv);
    for (std::size_t j = 0; j < nv; ++j)
        v.standard_error()[j] = B > 1 ? std::sqrt(s2[j] / static_cast<double>(B - 1) / static_cast<double>(B)) : 0.0;

    GridFunction dv = lattice_gradient(v);
    const std::size_t nd = dv.values().size();
    std::vector<double> d2(nd, 0.0);
    if (B > 1) {
        for (const auto& vb : out.values) {
            GridFunction gb(lat, m);
            gb.values() = vb;
            const GridFunction db = lattice_gradient(gb);
            for (std::size_t j = 0; j < nd; ++j) d2[j] += (db.values()[j] - dv.values()[j]) * (db.values()[j] - dv.values()[j]);
        }
    }
    dv.standard_error().resize(nd);
    for (std::size_t j = 0; j < nd; ++j)
        dv.standard_error()[j] = B > 1 ? std::sqrt(d2[j] / static_cast<double>(B - 1) / static_cast<double>(B)) : 0.0;

    s.v = std::move(v);
    s.dv = std::move(dv);
    s.out_of_box_fraction = out.out_of_box_fraction;
}

void finish(ResolventSolution& s, const OccupationKernel& K, const ResolventOptions& opt, const std::string& producer,
            double picard_error) {
    s.v_norm = s.v.sup_norm();
    s.dv_norm = s.dv.sup_norm();
    s.theta = s.alpha + effective_beta(s.alpha, s.beta) - 1.0;
    s.dv_seminorm = s.theta > 0.0 && s.theta <= 1.0 ? estimate_holder_seminorm(s.dv, s.theta, opt.seminorm_margin)
                                                    : std::numeric_limits<double>::quiet_NaN();
    const double mc = 3.0 * s.v.max_standard_error();
    s.error_budget = K.tail_mass() * s.f_norm + 2.0 * K.t_min() * s.f_norm + mc + picard_error;
    s.noise_warning = mc > opt.tol;
    s.t_star = K.t_star();
    for (GridFunction* g : {&s.v, &s.dv}) {
        auto& p = g->provenance();
        p.producer = producer;
        p.n_mc = opt.n_mc;
        p.seed = opt.seed;
        p.max_standard_error = g->max_standard_error();
        p.out_of_box_fraction = s.out_of_box_fraction;
        p.noise_warning = s.noise_warning;
        p.extra["lambda"] = s.lambda;
        p.extra["t_star"] = K.t_star();
    }
}

}  // namespace

nlohmann::json ResolventSolution::diagnostics() const {
    return {{"lambda", lambda},
            {"alpha", alpha},
            {"beta", beta},
            {"theta", theta},
            {"v_norm", v_norm},
            {"dv_norm", dv_norm},
            {"dv_seminorm", dv_seminorm},
            {"f_norm", f_norm},
            {"residuals", residuals},
            {"contraction", contraction},
            {"iterations", iterations},
            {"error_budget", error_budget},
            {"out_of_box_fraction", out_of_box_fraction},
            {"noise_warning", noise_warning},
            {"t_star", t_star},
            {"maximum_principle", satisfies_maximum_principle()}};
}

ResolventSolution resolvent_constant_drift(const LevyModel& model, const Vec& k, const Field& f, double lambda,
                                           const ResolventOptions& options) {
    const OccupationKernel K(model, k, lambda, options);
    const OccupationKernel::Output out = K.apply([&f](const Vec& x, double* o) {
        bool cl = false;
        o[0] = f.eval(x, cl);
        return cl;
    }, 1);
    ResolventSolution s;
    s.lambda = lambda;
    s.alpha = model.alpha();
    s.beta = options.beta;
    s.f_norm = field_norm({f}, options.lattice);
    assemble(out, 1, options.lattice, s);
    finish(s, K, options, "resolvent_constant_drift", 0.0);
    return s;
}

ResolventSolution resolvent_holder_drift(const LevyModel& model, const DriftSpec& b, const std::vector<Field>& f,
                                         double lambda, const ResolventOptions& options) {
    const double alpha = model.alpha();
    const double beta = b.beta();
    if (options.check_regime) {
        const double be = effective_beta(alpha, beta);
        if (!(alpha >= 1.0) || !(beta > 0.0 && beta < 1.0) || !(alpha + be > 1.0 && alpha + be < 2.0))
            throw DomainError("Holder-drift resolvent needs alpha >= 1, beta in (0,1) and alpha + beta in (1,2)");
    }
    if (f.empty() || f.size() > static_cast<std::size_t>(kMaxDim)) throw DomainError("need one to three right-hand sides");
    const int d = model.dimension();
    if (b.dimension() != d) throw DomainError("drift and model dimensions differ");
    const int m = static_cast<int>(f.size());
    const auto mm = static_cast<std::size_t>(m);

    const OccupationKernel K(model, zero_vec(d), lambda, options);
    ResolventSolution s;
    s.lambda = lambda;
    s.alpha = alpha;
    s.beta = beta;
    s.f_norm = field_norm(f, options.lattice);

    assemble(K.apply([&f, mm](const Vec& x, double* o) {
        bool cl = false;
        for (std::size_t j = 0; j < mm; ++j) o[j] = f[j].eval(x, cl);
        return cl;
    }, m), m, options.lattice, s);

    bool converged = false;
    double picard_error = 0.0;
    for (int it = 1; it <= options.max_iterations; ++it) {
        auto dv = std::make_shared<const GridFunction>(s.dv);
        ResolventSolution next;
        assemble(K.apply([&f, &b, dv, mm, d](const Vec& x, double* o) {
            double g[kMaxDim * kMaxDim];
            const bool cl_dv = dv->interpolate(x, g);
            bool cl = false;
            const Vec bx = b(x);
            for (std::size_t j = 0; j < mm; ++j) {
                double acc = f[j].eval(x, cl);
                for (int a = 0; a < d; ++a) acc += bx[a] * g[j * static_cast<std::size_t>(d) + static_cast<std::size_t>(a)];
                o[j] = acc;
            }
            return cl || cl_dv;
        }, m), m, options.lattice, next);

        double dist_v = 0.0, dist_dv = 0.0;
        for (std::size_t i = 0; i < options.lattice.size(); ++i) {
            double sv = 0.0;
            for (std::size_t j = 0; j < mm; ++j) sv += std::pow(next.v.at(i, static_cast<int>(j)) - s.v.at(i, static_cast<int>(j)), 2);
            dist_v = std::max(dist_v, std::sqrt(sv));
        }
        GridFunction diff = next.dv;
        for (std::size_t j = 0; j < diff.values().size(); ++j) diff.values()[j] -= s.dv.values()[j];
        dist_dv = diff.sup_norm();
        const double r = dist_v + dist_dv;
        s.residuals.push_back(r);
        s.iterations = it;
        const double oob = next.out_of_box_fraction;
        s.v = std::move(next.v);
        s.dv = std::move(next.dv);
        s.out_of_box_fraction = oob;

        if (s.residuals.size() >= 2) {
            const double prev = s.residuals[s.residuals.size() - 2];
            s.contraction = prev > 0.0 ? r / prev : 0.0;
            if (s.contraction >= options.refuse_above) {
                int j = 1;
                if (alpha > 1.0) {
                    const double need = std::log2(s.contraction / options.target_contraction) / (1.0 - 1.0 / alpha);
                    j = std::max(1, static_cast<int>(std::ceil(need)));
                }
                throw BudgetError("Picard iteration does not contract at lambda = " + std::to_string(lambda) +
                                      " (measured factor " + std::to_string(s.contraction) + ")",
                                  lambda * std::ldexp(1.0, j));
            }
        }
        if (r < options.tol) {
            converged = true;
            const double q = s.contraction;
            picard_error = q > 0.0 && q < 1.0 ? r * q / (1.0 - q) : r;
            break;
        }
    }
    if (!converged) throw ConvergenceError("Picard iteration did not reach the tolerance", s.residuals.back());
    finish(s, K, options, "resolvent_holder_drift", picard_error);
    return s;
}

ResolventSolution resolvent_holder_drift(const LevyModel& model, const DriftSpec& b, const Field& f, double lambda,
                                         const ResolventOptions& options) {
    return resolvent_holder_drift(model, b, std::vector<Field>{f}, lambda, options);
}

double generator_residual(const LevyModel& model, const ResolventSolution& sol, const std::vector<Field>& f,
                          const std::function<Vec(const Vec&)>& drift, int margin) {
    const Lattice& lat = sol.v.lattice();
    const int d = lat.dim;
    const int m = sol.v.rows();
    if (static_cast<int>(f.size()) != m) throw DomainError("right-hand side count differs from the solution");
    const double h = lat.spacing();
    const double reach = std::max(1.0, 2.0 * std::sqrt(static_cast<double>(d)) * lat.half_width);
    const double outer = std::min(reach, model.radial_extent());
    const double m2 = model.radial_moment(2.0, 0.0, h);
    const double tail = outer < model.radial_extent() ? model.radial_tail(outer) : 0.0;
    const auto& dirs = model.jump_directions();
    std::vector<double> worst(lat.size(), 0.0);

    parallel_for(lat.size(), [&](std::size_t i) {
        if (!lat.interior(i, margin)) return;
        const Vec x = lat.node(i);
        const Vec bx = drift(x);
        for (int j = 0; j < m; ++j) {
            const double vx = sol.v.at(i, j);
            Vec grad(d);
            for (int a = 0; a < d; ++a) grad[a] = sol.dv.at(i, j * d + a);
            double lv = 0.0;
            for (const Direction& dir : dirs) {
                const Vec& th = dir.xi;
                const double q = (sol.v.interpolate(Vec(x + h * th), j) + sol.v.interpolate(Vec(x - h * th), j) - 2.0 * vx) / (h * h);
                double acc = 0.5 * q * m2;
                const double slope = th.dot(grad);
                auto integrand = [&](double s) {
                    const double comp = s <= 1.0 ? s * slope : 0.0;
                    return (sol.v.interpolate(Vec(x + s * th), j) - vx - comp) * model.radial_density(s);
                };
                if (outer > h) acc += integrate_radial(integrand, h, outer, std::numbers::pi / h).value;
                acc += (sol.v.interpolate(Vec(x + outer * th), j) - vx) * tail;
                lv += dir.weight * acc;
            }
            const double r = sol.lambda * vx - bx.dot(grad) - lv - f[static_cast<std::size_t>(j)](x);
            worst[i] = std::max(worst[i], std::abs(r));
        }
    });
    return *std::max_element(worst.begin(), worst.end());
}

nlohmann::json SchauderCheck::to_json() const {
    return {{"k_norms", k_norms}, {"ratios", ratios}, {"spread", spread}, {"f_holder_norm", f_holder_norm}, {"pass", pass}};
}

SchauderCheck verify_schauder_k_independence(const LevyModel& model, const Field& f, double lambda,
                                             const std::vector<Vec>& k_list, const ResolventOptions& options) {
    if (k_list.empty()) throw DomainError("need at least one drift vector");
    SchauderCheck c;
    const GridFunction fs = GridFunction::sample(options.lattice, [&f](const Vec& x) { return f(x); });
    c.f_holder_norm = fs.sup_norm() + estimate_holder_seminorm(fs, options.beta);
    if (!(c.f_holder_norm > 0.0)) throw DomainError("f vanishes on the lattice");
    for (const Vec& k : k_list) {
        const ResolventSolution s = resolvent_constant_drift(model, k, f, lambda, options);
        const double val = std::pow(lambda, s.theta / s.alpha) * s.dv_norm + s.dv_seminorm;
        c.k_norms.push_back(k.norm());
        c.ratios.push_back(val / c.f_holder_norm);
    }
    const double hi = *std::max_element(c.ratios.begin(), c.ratios.end());
    const double lo = *std::min_element(c.ratios.begin(), c.ratios.end());
    c.spread = hi == 0.0 ? 1.0 : (lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity());
    c.pass = c.spread <= 2.0;
    return c;
}

}  // namespace levyflow
