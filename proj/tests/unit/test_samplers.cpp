#include <doctest.h>

#include "levyflow/samplers.hpp"
#include "levyflow/stats.hpp"

#include <cmath>
#include <numbers>

using namespace levyflow;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }
Vec v2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}
std::vector<Direction> pm_e1() { return {{v1(1.0), 0.5}, {v1(-1.0), 0.5}}; }

}  // namespace

TEST_CASE("Cauchy increments") {
    RandomStream rng(11);
    const std::size_t n = 100000;
    std::vector<double> x(n);
    for (auto& v : x) v = sample_stable_increment(1.0, 1.0, 1.0, rng);
    std::size_t below = 0;
    for (double v : x) below += v <= 1.0;
    const double p = static_cast<double>(below) / n;
    CHECK(std::abs(p - 0.75) < 3.0 * std::sqrt(0.75 * 0.25 / n));
    const double med = median(x);
    CHECK(std::abs(med) < 3.0 * std::numbers::pi / (2.0 * std::sqrt(static_cast<double>(n))));
    const double ks = ks_distance(x, [](double t) { return 0.5 + std::atan(t) / std::numbers::pi; });
    CHECK(ks < 1.36 / std::sqrt(static_cast<double>(n)) * 1.5);
    CHECK_THROWS_AS(sample_stable_increment(2.0, 1.0, 1.0, rng), DomainError);
}

TEST_CASE("stable scaling in law") {
    for (double alpha : {0.5, 1.2, 1.8}) {
        RandomStream a(21), b(22);
        const std::size_t n = 20000;
        std::vector<double> small(n), scaled(n);
        const double dt = 0.3;
        for (auto& v : small) v = sample_stable_increment(alpha, 1.0, dt, a);
        for (auto& v : scaled) v = std::pow(dt, 1.0 / alpha) * sample_stable_increment(alpha, 1.0, 1.0, b);
        CHECK(ks_distance_two_sample(small, scaled) < ks_two_sample_critical_001(n, n));
    }
}

TEST_CASE("positive stable Laplace transform") {
    RandomStream rng(5);
    for (double a : {0.25, 0.75}) {
        std::vector<double> e;
        for (int i = 0; i < 100000; ++i) e.push_back(std::exp(-sample_positive_stable(a, rng)));
        const auto ms = mean_se(e);
        CHECK(std::abs(ms.mean - std::exp(-1.0)) < 4.0 * ms.se);
    }
}

TEST_CASE("relativistic increments") {
    RandomStream rng(9);
    CHECK(sample_relativistic_increment(1, 1.0, 1.0, 0.0, rng)[0] == 0.0);
    // Var = alpha m^{1 - 2/alpha} dt per coordinate (second derivative of the symbol at 0).
    for (double m : {1.0, 2.0, 4.0}) {
        const double alpha = 1.5, dt = 0.25;
        std::vector<double> sq;
        for (int i = 0; i < 50000; ++i) {
            const double x = sample_relativistic_increment(1, alpha, m, dt, rng)[0];
            sq.push_back(x * x);
        }
        const auto ms = mean_se(sq);
        CHECK(std::abs(ms.mean - alpha * std::pow(m, 1.0 - 2.0 / alpha) * dt) < 4.0 * ms.se);
    }
    CHECK_THROWS_AS(sample_relativistic_increment(1, 1.0, 20.0, 1.0, rng), ConvergenceError);
}

TEST_CASE("empirical characteristic function for every class") {
    std::vector<LevyModel> models = {
        LevyModel::isotropic_stable(1, 1.5), LevyModel::isotropic_stable(2, 0.8, 0.7),
        LevyModel::axis_stable(2, 1.2, {1.0, 0.5}), LevyModel::truncated_stable(1, 1.5, pm_e1()),
        LevyModel::tempered_stable(2, 1.2, quasi_uniform_sphere(2, 8, 1.0)),
        LevyModel::relativistic_stable(2, 1.0, 1.0),
        LevyModel::spherical_radial(2, 1.3, quasi_uniform_sphere(2, 6, 1.0))};
    RandomStream root(99);
    std::uint64_t k = 0;
    for (const auto& m : models) {
        const int d = m.dimension();
        std::vector<Vec> probes;
        for (double s : {0.3, 0.7, 1.0, 1.6, 2.5}) probes.push_back(d == 1 ? v1(s) : v2(s, -0.5 * s));
        auto rng = root.child(k++);
        const auto cf = empirical_cf_check(m, 1.0, probes, 40000, rng, 0.05, SmallJumpScheme::Auto);
        CHECK_MESSAGE(cf.pass, to_string(m.model_class()));
    }
}

TEST_CASE("characteristic function under the drop scheme and at t = 0") {
    const auto m = LevyModel::truncated_stable(1, 1.5, pm_e1());
    RandomStream rng(3);
    const auto cf = empirical_cf_check(m, 1.0, {v1(1.0), v1(3.0)}, 20000, rng, 0.1, SmallJumpScheme::Drop);
    CHECK(cf.pass);
    CHECK(cf.probes[0].bias_bound > 0.0);
    const auto cf0 = empirical_cf_check(LevyModel::isotropic_stable(1, 1.0), 0.0, {v1(1.0)}, 10000, rng);
    CHECK(cf0.max_abs_deviation == 0.0);
    const auto iso = empirical_cf_check(LevyModel::isotropic_stable(1, 1.0), 1.0, {v1(1.0)}, 100000, rng);
    CHECK(iso.max_abs_deviation < 3.0 * iso.se_at_max);
}

TEST_CASE("jump paths") {
    const auto m = LevyModel::isotropic_stable(1, 1.5);
    RandomStream r1(42), r2(42);
    PathOptions opt;
    opt.scheme = SmallJumpScheme::GaussianAR;
    const auto p1 = sample_path(m, 1.0, 100, 0.1, r1, opt);
    const auto p2 = sample_path(m, 1.0, 100, 0.1, r2, opt);
    CHECK(encode_blob(p1.to_blob()) == encode_blob(p2.to_blob()));
    CHECK(p1.grid.front() == 0.0);
    CHECK(p1.grid.back() == 1.0);
    for (std::size_t k = 0; k + 1 < p1.grid.size(); ++k) CHECK(p1.grid[k] <= p1.grid[k + 1]);
    for (const auto& j : p1.big_jumps) {
        CHECK(std::abs(j.z[0]) > 0.1);
        CHECK(p1.grid[j.segment + 1] == j.time);
        CHECK(p1.increments[j.segment][0] == doctest::Approx(p1.small_increments[j.segment][0] + j.z[0]));
    }
    CHECK(p1.compensation_drift[0] == 0.0);

    const auto back = JumpPath::from_blob(decode_blob(encode_blob(p1.to_blob())));
    CHECK(encode_blob(back.to_blob()) == encode_blob(p1.to_blob()));

    // Coarsening keeps every jump and the endpoint.
    const auto c = p1.coarsen(4);
    CHECK(c.n_cells == 25);
    CHECK(c.big_jumps.size() == p1.big_jumps.size());
    CHECK(c.values().back()[0] == doctest::Approx(p1.values().back()[0]).epsilon(1e-12));
    for (const auto& j : c.big_jumps) CHECK(c.grid[j.segment + 1] == j.time);
    CHECK_THROWS_AS(p1.coarsen(3), DomainError);

    RandomStream r3(1);
    const auto drop = sample_path(LevyModel::tempered_stable(1, 1.2, pm_e1()), 1.0, 50, 0.2, r3,
                                  PathOptions{SmallJumpScheme::Drop, 1e7});
    CHECK(drop.compensation_drift[0] == 0.0);
    CHECK(drop.drop_error_bound > 0.0);
    for (const auto& inc : drop.small_increments) CHECK(inc[0] == 0.0);
}

TEST_CASE("truncated model never jumps beyond its radius") {
    const auto m = LevyModel::truncated_stable(2, 1.5, quasi_uniform_sphere(2, 8, 1.0));
    RandomStream rng(8);
    std::size_t total = 0;
    for (int i = 0; i < 50; ++i) {
        auto r = rng.child(static_cast<std::uint64_t>(i));
        const auto p = sample_path(m, 1.0, 20, 0.05, r);
        for (const auto& j : p.big_jumps) CHECK(j.z.norm() <= 1.0 + 1e-12);
        total += p.big_jumps.size();
    }
    CHECK(total > 0);
}

TEST_CASE("big-jump counts are Poisson") {
    const auto m = LevyModel::tempered_stable(1, 1.0, pm_e1());
    const double eps = 0.2;
    const JumpLaw law(m, eps);
    const double mean = law.intensity();
    RandomStream root(77);
    const int n = 2000;
    std::vector<int> counts;
    const PathSampler sampler(m, eps);
    for (int i = 0; i < n; ++i) {
        auto r = root.child(static_cast<std::uint64_t>(i));
        counts.push_back(static_cast<int>(sampler.sample(1.0, 4, r).big_jumps.size()));
    }
    // Chi-square over bins {0..K-1, >=K} with expected counts >= 5.
    std::vector<double> p;
    double pk = std::exp(-mean), acc = 0.0;
    int k = 0;
    while (n * pk >= 5.0 || k < static_cast<int>(mean)) {
        p.push_back(pk);
        acc += pk;
        ++k;
        pk *= mean / k;
    }
    p.push_back(1.0 - acc);
    std::vector<double> obs(p.size(), 0.0);
    for (int c : counts) obs[std::min<std::size_t>(static_cast<std::size_t>(c), p.size() - 1)] += 1.0;
    double chi2 = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) chi2 += std::pow(obs[i] - n * p[i], 2) / (n * p[i]);
    CHECK(chi2 < chi_squared_quantile(static_cast<double>(p.size() - 1), 0.99));
}

TEST_CASE("additivity and symmetry in law") {
    const auto m = LevyModel::tempered_stable(1, 1.3, pm_e1());
    const MarginalSampler sampler(m, 0.05, SmallJumpScheme::GaussianAR);
    RandomStream a(1), b(2);
    const std::size_t n = 20000;
    std::vector<double> whole(n), parts(n);
    for (auto& v : whole) v = sampler.sample(2.0, a)[0];
    for (auto& v : parts) v = sampler.sample(1.0, b)[0] + sampler.sample(1.0, b)[0];
    CHECK(ks_distance_two_sample(whole, parts) < ks_two_sample_critical_001(n, n));
    std::vector<double> sign;
    for (double v : whole) sign.push_back(v > 0.0 ? 1.0 : 0.0);
    const auto ms = mean_se(sign);
    CHECK(std::abs(ms.mean - 0.5) < 3.0 * ms.se);
}

TEST_CASE("budget refusal suggests a feasible cut") {
    const auto m = LevyModel::isotropic_stable(1, 1.5);
    RandomStream rng(1);
    PathOptions opt{SmallJumpScheme::GaussianAR, 1000.0};
    try {
        sample_path(m, 1.0, 10, 1e-5, rng, opt);
        FAIL("expected a budget error");
    } catch (const BudgetError& e) {
        const double eps = e.suggestion();
        CHECK(eps > 1e-5);
        const JumpLaw law(m, eps);
        CHECK(law.intensity() <= 1000.0 * (1.0 + 1e-5));
        CHECK_NOTHROW(sample_path(m, 1.0, 10, eps, rng, opt));
    }
}

TEST_CASE("auto scheme selection") {
    const auto trunc = LevyModel::truncated_stable(1, 1.5, pm_e1());
    CHECK(resolve_scheme(trunc, SmallJumpScheme::Auto, JumpLaw(trunc, 0.01)) == SmallJumpScheme::GaussianAR);
    CHECK(resolve_scheme(trunc, SmallJumpScheme::Auto, JumpLaw(trunc, 1.0)) == SmallJumpScheme::Drop);
    CHECK(resolve_scheme(LevyModel::isotropic_stable(1, 1.5), SmallJumpScheme::Auto,
                         JumpLaw(LevyModel::isotropic_stable(1, 1.5), 0.1)) == SmallJumpScheme::Exact);
    CHECK_THROWS_AS(resolve_scheme(trunc, SmallJumpScheme::Exact, JumpLaw(trunc, 0.1)), DomainError);
}

TEST_CASE("child streams are independent of consumption order") {
    RandomStream root(123);
    auto c3 = root.child(3);
    RandomStream other(123);
    other.uniform();
    auto c3b = other.child(3);
    CHECK(c3.bits() == c3b.bits());
    CHECK(root.child(1).seed() != root.child(2).seed());
}
