#include "levyflow/semigroup.hpp"

#include "levyflow/parallel.hpp"
#include "levyflow/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

namespace levyflow {

namespace {

constexpr std::size_t kNoiseChunk = 4096;

double cube_norm(const Vec& x) { return x.cwiseAbs().maxCoeff(); }

void check_dim(const Vec& x, int d) {
    if (x.size() != d) throw DomainError("argument dimension does not match the field");
}

}  // namespace

Field Field::with_clamp(Fn fn, double bound, std::string name) {
    Field f;
    f.fn_ = std::move(fn);
    f.bound_ = bound;
    f.name_ = std::move(name);
    return f;
}

Field Field::from_grid(std::shared_ptr<const GridFunction> g, int comp) {
    if (comp < 0 || comp >= g->components()) throw DomainError("grid component out of range");
    const double bound = g->sup_norm();
    return with_clamp(
        [g, comp](const Vec& x, bool* clamped) {
            double buf[kMaxDim * kMaxDim];
            const bool c = g->interpolate(x, buf);
            if (c && clamped) *clamped = true;
            return buf[comp];
        },
        bound, "lattice");
}

namespace test_functions {

Field sharp_bump(int d, double half_width) {
    Field f([d, half_width](const Vec& x) {
        check_dim(x, d);
        return cube_norm(x) <= half_width ? 1.0 : 0.0;
    }, 1.0, "sharp_bump");
    f.set_spec({{"type", "sharp_bump"}, {"half_width", half_width}});
    return f;
}

Field smooth_bump(int d, double width) {
    Field f([d, width](const Vec& x) {
        check_dim(x, d);
        const double r2 = x.squaredNorm() / (width * width);
        return r2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r2)) : 0.0;
    }, 1.0, "smooth_bump");
    f.set_spec({{"type", "smooth_bump"}, {"width", width}});
    return f;
}

Field holder_bump(int d, double beta, double width) {
    if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("holder_bump needs beta in (0,1]");
    Field f([d, beta, width](const Vec& x) {
        check_dim(x, d);
        const double r = 1.0 - x.norm() / width;
        return r > 0.0 ? std::pow(r, beta) : 0.0;
    }, 1.0, "holder_bump");
    f.set_spec({{"type", "holder_bump"}, {"beta", beta}, {"width", width}});
    return f;
}

Field ramp(int d) {
    Field f([d](const Vec& x) {
        check_dim(x, d);
        return std::clamp(x[0], -1.0, 1.0);
    }, 1.0, "ramp");
    f.set_spec({{"type", "ramp"}});
    return f;
}

Field cos_mode(const Vec& u) {
    Field f([u](const Vec& x) {
        check_dim(x, static_cast<int>(u.size()));
        return std::cos(u.dot(x));
    }, 1.0, "cos_mode");
    f.set_spec({{"type", "cos_mode"}, {"u", to_std(u)}});
    return f;
}

Field sin_mode(const Vec& u) {
    Field f([u](const Vec& x) {
        check_dim(x, static_cast<int>(u.size()));
        return std::sin(u.dot(x));
    }, 1.0, "sin_mode");
    f.set_spec({{"type", "sin_mode"}, {"u", to_std(u)}});
    return f;
}

Field trig_product(int d, double freq) {
    Field f([d, freq](const Vec& x) {
        check_dim(x, d);
        double p = 1.0;
        for (int k = 0; k < d; ++k) p *= std::cos(freq * x[k]);
        return p;
    }, 1.0, "trig_product");
    f.set_spec({{"type", "trig_product"}, {"freq", freq}});
    return f;
}

Field constant(int d, double c) {
    Field f([d, c](const Vec& x) {
        check_dim(x, d);
        return c;
    }, std::abs(c), "constant");
    f.set_spec({{"type", "constant"}, {"value", c}});
    return f;
}

std::vector<Field> battery(int d) {
    return {sharp_bump(d, 0.25), sharp_bump(d, 0.5), sharp_bump(d, 1.0), smooth_bump(d, 1.0), ramp(d),
            trig_product(d, 2.0)};
}

}  // namespace test_functions

Field field_from_json(int d, const nlohmann::json& j) {
    const std::string type = j.at("type").get<std::string>();
    namespace tf = test_functions;
    if (type == "sharp_bump") return tf::sharp_bump(d, j.value("half_width", 1.0));
    if (type == "smooth_bump") return tf::smooth_bump(d, j.value("width", 1.0));
    if (type == "holder_bump") return tf::holder_bump(d, j.at("beta").get<double>(), j.value("width", 1.0));
    if (type == "ramp") return tf::ramp(d);
    if (type == "cos_mode" || type == "sin_mode") {
        const Vec u = from_std(j.at("u").get<std::vector<double>>());
        if (u.size() != d) throw DomainError("mode vector has the wrong dimension");
        return type == "cos_mode" ? tf::cos_mode(u) : tf::sin_mode(u);
    }
    if (type == "trig_product") return tf::trig_product(d, j.value("freq", 1.0));
    if (type == "constant") return tf::constant(d, j.at("value").get<double>());
    throw DomainError("unknown test function: " + type);
}

NoiseBatch draw_noise(const MarginalSampler& sampler, double t, std::size_t n, RandomStream& rng) {
    if (n == 0) throw DomainError("n_mc must be positive");
    if (!(t > 0.0)) throw DomainError("noise batches need t > 0");
    NoiseBatch batch;
    batch.t = t;
    batch.seed = rng.bits();
    batch.samples.resize(n);
    const std::size_t chunks = (n + kNoiseChunk - 1) / kNoiseChunk;
    parallel_for(chunks, [&](std::size_t c) {
        RandomStream local(derive_seed(batch.seed, c));
        const std::size_t end = std::min(n, (c + 1) * kNoiseChunk);
        for (std::size_t i = c * kNoiseChunk; i < end; ++i) batch.samples[i] = sampler.sample(t, local);
    });
    return batch;
}

GridFunction apply_batch(const NoiseBatch& batch, const Field& f, const Vec& shift, const Lattice& lattice) {
    const int d = lattice.dim;
    if (shift.size() != d) throw DomainError("shift has the wrong dimension");
    GridFunction out(lattice, 1);
    out.standard_error().assign(lattice.size(), 0.0);
    const auto n = static_cast<double>(batch.samples.size());
    std::vector<std::size_t> clamped(lattice.size(), 0);
    parallel_for(lattice.size(), [&](std::size_t i) {
        const Vec x = lattice.node(i) + shift;
        double s = 0.0, s2 = 0.0;
        std::size_t c = 0;
        for (const Vec& l : batch.samples) {
            bool cl = false;
            const double v = f.eval(x + l, cl);
            if (cl) ++c;
            s += v;
            s2 += v * v;
        }
        const double mean = s / n;
        out.at(i) = mean;
        const double var = n > 1.0 ? std::max(0.0, (s2 - n * mean * mean) / (n - 1.0)) : 0.0;
        out.standard_error()[i] = std::sqrt(var / n);
        clamped[i] = c;
    });
    std::size_t total = 0;
    for (auto c : clamped) total += c;
    auto& p = out.provenance();
    p.producer = "apply_semigroup";
    p.n_mc = batch.samples.size();
    p.seed = batch.seed;
    p.max_standard_error = out.max_standard_error();
    p.out_of_box_fraction = static_cast<double>(total) / (n * static_cast<double>(lattice.size()));
    p.extra["t"] = batch.t;
    return out;
}

GridFunction apply_shifted(const LevyModel& model, const Field& f, double t, const Vec& k, std::size_t n_mc,
                           RandomStream& rng, const Lattice& lattice, const SemigroupOptions& options) {
    if (!(t >= 0.0)) throw DomainError("t must be non-negative");
    if (n_mc == 0) throw DomainError("n_mc must be positive");
    if (model.dimension() != lattice.dim) throw DomainError("model and lattice dimensions differ");
    if (t == 0.0) {
        GridFunction g = GridFunction::sample(lattice, [&f](const Vec& x) { return f(x); });
        g.standard_error().assign(lattice.size(), 0.0);
        g.provenance().producer = "apply_semigroup";
        g.provenance().extra["t"] = 0.0;
        return g;
    }
    const MarginalSampler sampler(model, options.eps, options.scheme);
    const NoiseBatch batch = draw_noise(sampler, t, n_mc, rng);
    return apply_batch(batch, f, Vec(t * k), lattice);
}

GridFunction apply_semigroup(const LevyModel& model, const Field& f, double t, std::size_t n_mc, RandomStream& rng,
                             const Lattice& lattice, const SemigroupOptions& options) {
    return apply_shifted(model, f, t, zero_vec(model.dimension()), n_mc, rng, lattice, options);
}

GridFunction gradient_semigroup(const LevyModel& model, const Field& f, double t, std::size_t n_mc,
                                RandomStream& rng, const Lattice& lattice, const SemigroupOptions& options) {
    if (!(t > 0.0)) throw DomainError("gradient_semigroup needs t > 0");
    if (n_mc == 0) throw DomainError("n_mc must be positive");
    if (model.dimension() != lattice.dim) throw DomainError("model and lattice dimensions differ");
    const int d = lattice.dim;
    const double fd = options.fd_step > 0.0 ? options.fd_step : lattice.spacing();
    const MarginalSampler sampler(model, options.eps, options.scheme);
    const NoiseBatch batch = draw_noise(sampler, t, n_mc, rng);
    const auto n = static_cast<double>(n_mc);

    GridFunction out(lattice, d);
    out.standard_error().assign(lattice.size() * static_cast<std::size_t>(d), 0.0);
    parallel_for(lattice.size(), [&](std::size_t i) {
        const Vec x = lattice.node(i);
        for (int k = 0; k < d; ++k) {
            const Vec e = unit_vec(d, k) * fd;
            double s = 0.0, s2 = 0.0;
            for (const Vec& l : batch.samples) {
                const double q = (f(x + e + l) - f(x - e + l)) / (2.0 * fd);
                s += q;
                s2 += q * q;
            }
            const double mean = s / n;
            out.at(i, k) = mean;
            const double var = n > 1.0 ? std::max(0.0, (s2 - n * mean * mean) / (n - 1.0)) : 0.0;
            out.standard_error()[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(k)] = std::sqrt(var / n);
        }
    });
    auto& p = out.provenance();
    p.producer = "gradient_semigroup";
    p.n_mc = n_mc;
    p.seed = batch.seed;
    p.max_standard_error = out.max_standard_error();
    p.noise_warning = p.max_standard_error > options.noise_tolerance * std::max(out.sup_norm(), 1e-300);
    p.extra["t"] = t;
    p.extra["fd_step"] = fd;
    return out;
}

nlohmann::json GradientDecay::to_json() const {
    return {{"alpha", alpha}, {"slope", slope}, {"pass", pass}, {"times", times},
            {"norms", norms}, {"standard_errors", standard_errors}, {"noise_warning", noise_warning}};
}

GradientDecay verify_gradient_decay(const LevyModel& model, const Field& f, const std::vector<double>& t_list,
                                    const DecayOptions& options) {
    if (t_list.size() < 4) throw DomainError("gradient decay needs at least four times");
    for (double t : t_list)
        if (!(t > 0.0 && t <= 1.0)) throw DomainError("gradient decay times must lie in (0,1]");
    GradientDecay r;
    r.alpha = model.alpha();
    r.times = t_list;
    RandomStream root(options.seed);
    std::vector<double> lx, ly;
    for (std::size_t j = 0; j < t_list.size(); ++j) {
        const double t = t_list[j];
        SemigroupOptions so;
        so.eps = options.eps;
        so.fd_step = options.fd_factor * std::pow(t, 1.0 / model.alpha());
        RandomStream rng = root.child(j);
        const GridFunction g = gradient_semigroup(model, f, t, options.n_mc, rng, options.lattice, so);
        double best = 0.0, se = 0.0;
        for (std::size_t i = 0; i < g.lattice().size(); ++i) {
            const double v = g.value_norm(i);
            if (v > best) {
                best = v;
                se = 0.0;
                for (int k = 0; k < g.components(); ++k)
                    se = std::max(se, g.standard_error()[i * static_cast<std::size_t>(g.components()) + static_cast<std::size_t>(k)]);
            }
        }
        r.norms.push_back(best);
        r.standard_errors.push_back(se);
        r.noise_warning = r.noise_warning || g.provenance().noise_warning;
        lx.push_back(std::log(t));
        ly.push_back(std::log(std::max(best, 1e-300)));
    }
    const double top = *std::max_element(r.norms.begin(), r.norms.end());
    const double bottom = *std::min_element(r.norms.begin(), r.norms.end());
    if (!(top > 1e-12) || top - bottom <= 1e-12 * top) throw DomainError("degenerate fit: gradient norms are constant");
    r.slope = least_squares_line(lx, ly).slope;
    r.pass = r.slope >= -1.0 / model.alpha() - options.slack;
    return r;
}

}  // namespace levyflow
