#include <doctest.h>

#include "levyflow/levy_model.hpp"
#include "levyflow/quadrature.hpp"
#include "levyflow/rng.hpp"

#include <cmath>
#include <limits>
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

// int_0^1 (1 - cos(a s)) s^{-1-alpha} ds by subtracting the quadratic term and applying composite
// Simpson to the smooth remainder.
double truncated_oracle(double a, double alpha) {
    const int n = 200000;
    const double h = 1.0 / n;
    auto f = [&](double s) {
        if (s == 0.0) return 0.0;
        const double x = a * s;
        const double rem = x < 1e-3 ? -std::pow(x, 4) / 24.0 + std::pow(x, 6) / 720.0 : 1.0 - std::cos(x) - 0.5 * x * x;
        return rem * std::pow(s, -1.0 - alpha);
    };
    double sum = f(0.0) + f(1.0);
    for (int i = 1; i < n; ++i) sum += f(i * h) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0 + 0.5 * a * a / (2.0 - alpha);
}

double tempered_closed_form(double a, double alpha) {
    a = std::abs(a);
    if (alpha == 1.0) return a * std::atan(a) - 0.5 * std::log1p(a * a);
    return std::tgamma(-alpha) * (1.0 - std::pow(1.0 + a * a, alpha / 2.0) * std::cos(alpha * std::atan(a)));
}

}  // namespace

TEST_CASE("stable constant matches its closed form values") {
    CHECK(stable_constant(0.5) == doctest::Approx(2.5066282746310007).epsilon(1e-13));
    CHECK(stable_constant(1.0) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-15));
    CHECK(stable_constant(1.5) == doctest::Approx(1.6710855164206668).epsilon(1e-13));
    CHECK(sphere_projection_moment(0.7, 1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sphere_projection_moment(1.0, 2) == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-14));
}

TEST_CASE("closed-form symbols") {
    const auto rel = LevyModel::relativistic_stable(1, 1.0, 1.0);
    CHECK(rel.symbol(v1(0.0)).real() == 0.0);
    CHECK(rel.symbol(v1(std::sqrt(3.0))).real() == doctest::Approx(1.0).epsilon(1e-14));
    const auto rel2 = LevyModel::relativistic_stable(2, 1.0, 1.0);
    CHECK(rel2.symbol(v2(1.0, std::sqrt(2.0))).real() == doctest::Approx(1.0).epsilon(1e-14));

    const auto iso = LevyModel::isotropic_stable(1, 1.5, 1.0);
    CHECK(iso.symbol(v1(2.0)).real() == doctest::Approx(2.8284271247461903).epsilon(1e-14));
    const auto iso2 = LevyModel::isotropic_stable(2, 1.5, 2.0);
    const Vec u = v2(0.3, -1.1);
    for (double s : {0.1, 2.0, 17.0})
        CHECK(iso2.symbol_real(s * u) == doctest::Approx(std::pow(s, 1.5) * iso2.symbol_real(u)).epsilon(1e-13));

    const auto axis = LevyModel::axis_stable(2, 1.2, {1.0, 3.0});
    CHECK(axis.symbol_real(v2(2.0, -1.0)) == doctest::Approx(std::pow(2.0, 1.2) + 3.0).epsilon(1e-14));
}

TEST_CASE("truncated symbol agrees with independent quadrature") {
    struct Case {
        double alpha, u, expected;
    };
    // High-precision values of int_0^1 (1 - cos(u s)) s^{-1-alpha} ds.
    const Case cases[] = {{1.5, 1.0, 0.98363819190229002},
                          {1.5, 10.0, 52.209731443732161},
                          {1.0, 2.0, 1.79467911705824731},
                          {1.5, 30.0, 273.953747007536142},
                          {0.5, 3.0, 2.19972910062554779}};
    for (const auto& c : cases) {
        const auto m = LevyModel::truncated_stable(1, c.alpha, pm_e1());
        CHECK(m.symbol_real(v1(c.u)) == doctest::Approx(c.expected).epsilon(1e-10));
        CHECK(truncated_oracle(c.u, c.alpha) == doctest::Approx(c.expected).epsilon(1e-8));
    }
}

TEST_CASE("tempered symbol agrees with its closed form") {
    for (double alpha : {0.5, 1.0, 1.5}) {
        const auto m = LevyModel::tempered_stable(1, alpha, pm_e1());
        for (double a : {0.1, 0.5, 3.0, 50.0, 400.0}) {
            const double expected = tempered_closed_form(a, alpha);
            CHECK(std::abs(m.symbol_real(v1(a)) - expected) < 1e-8 * std::max(1.0, expected));
        }
    }
}

TEST_CASE("Levy measures reproduce the closed-form symbols") {
    // Isotropic and relativistic densities are derived, so integrate them back.
    auto lk = [](const LevyModel& m, const Vec& u) {
        double total = 0.0;
        for (const auto& dir : m.jump_directions()) {
            const double a = std::abs(u.dot(dir.xi));
            const double hi = std::isinf(m.radial_extent()) ? 200.0 : m.radial_extent();
            auto f = [&](double s) { return 2.0 * std::pow(std::sin(0.5 * a * s), 2) * m.radial_density(s); };
            double v = integrate_radial(f, 0.0, hi, a).value;
            if (std::isinf(m.radial_extent())) v += std::pow(hi, -m.alpha()) / m.alpha();
            total += dir.weight * v;
        }
        return total;
    };
    const auto rel = LevyModel::relativistic_stable(1, 1.5, 2.0);
    CHECK(lk(rel, v1(0.8)) == doctest::Approx(0.37000376427399795).epsilon(1e-7));
    const auto rel07 = LevyModel::relativistic_stable(1, 0.7, 1.0);
    CHECK(lk(rel07, v1(2.0)) == doctest::Approx(rel07.symbol_real(v1(2.0))).epsilon(1e-7));
    const auto iso = LevyModel::isotropic_stable(1, 1.2, 1.7);
    CHECK(lk(iso, v1(1.3)) == doctest::Approx(iso.symbol_real(v1(1.3))).epsilon(1e-3));
    const auto iso2 = LevyModel::isotropic_stable(2, 1.2, 1.0);
    CHECK(lk(iso2, v2(0.6, 0.8)) == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("spherical radial symbol matches radial quadrature with analytic tail") {
    std::vector<Direction> mu = {{v2(1, 0), 0.3}, {v2(-1, 0), 0.3}, {v2(0.6, 0.8), 0.2}, {v2(-0.6, -0.8), 0.2}};
    const auto m = LevyModel::spherical_radial(2, 1.3, mu);
    const Vec u = v2(1.7, -0.4);
    double expected = 0.0;
    for (const auto& dir : mu) {
        const double a = std::abs(u.dot(dir.xi));
        const double hi = 4000.0;
        auto f = [&](double s) { return 2.0 * std::pow(std::sin(0.5 * a * s), 2) * std::pow(s, -2.3); };
        expected += dir.weight * (integrate_radial(f, 0.0, hi, a).value + std::pow(hi, -1.3) / 1.3);
    }
    CHECK(m.symbol_real(u) == doctest::Approx(expected).epsilon(1e-5));
}

TEST_CASE("symbols are even") {
    RandomStream rng(7);
    std::vector<LevyModel> models = {
        LevyModel::isotropic_stable(2, 1.5), LevyModel::axis_stable(2, 0.8, {1.0, 2.0}),
        LevyModel::truncated_stable(2, 1.5, quasi_uniform_sphere(2, 8, 1.0)),
        LevyModel::tempered_stable(2, 1.0, quasi_uniform_sphere(2, 8, 1.0)),
        LevyModel::relativistic_stable(2, 1.0, 1.0),
        LevyModel::spherical_radial(2, 1.2, quasi_uniform_sphere(2, 6, 2.0))};
    for (const auto& m : models) {
        for (int i = 0; i < 10; ++i) {
            const Vec u = rng.normal_vec(2) * 5.0;
            const auto a = m.symbol(u);
            const auto b = m.symbol(Vec(-u));
            CHECK(std::abs(a - b) < 1e-10);
            CHECK(std::abs(a.imag()) < 1e-12);
        }
    }
}

TEST_CASE("non-symmetric measure carries an odd imaginary part") {
    std::vector<Direction> mu = {{v1(1.0), 1.0}, {v1(-1.0), 0.5}};
    const auto m = LevyModel::truncated_stable(1, 1.5, mu);
    const auto a = m.symbol(v1(2.0));
    const auto b = m.symbol(v1(-2.0));
    CHECK(a.real() == doctest::Approx(b.real()));
    CHECK(a.imag() == doctest::Approx(-b.imag()));
    // -0.5 * int_0^1 (sin 2s - 2s) s^{-2.5} ds
    auto f = [](double s) { return (std::sin(2.0 * s) - 2.0 * s) * std::pow(s, -2.5); };
    CHECK(a.imag() == doctest::Approx(-0.5 * integrate_radial(f, 0.0, 1.0, 2.0).value).epsilon(1e-8));
}

TEST_CASE("sector bounds") {
    const auto iso = LevyModel::isotropic_stable(2, 1.0, 1.0);
    for (double M : {0.1, 10.0, 1000.0}) {
        const auto sb = check_sector_bounds(iso, M, 100);
        CHECK(sb.c1 == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(sb.c2 == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(sb.pass);
    }
    const auto trunc = LevyModel::truncated_stable(2, 1.5, quasi_uniform_sphere(2, 16, 1.0));
    const auto sb = check_sector_bounds(trunc, 10.0, 100);
    CHECK(sb.pass);
    CHECK(sb.c2 / sb.c1 < 2.0);
    // Independent oracle at one probe per axis direction.
    const Vec u = v2(37.0, 0.0);
    double expected = 0.0;
    for (const auto& dir : trunc.jump_directions()) expected += dir.weight * truncated_oracle(std::abs(u.dot(dir.xi)), 1.5);
    CHECK(trunc.symbol_real(u) == doctest::Approx(expected).epsilon(1e-8));

    std::vector<Direction> line = {{v2(1, 0), 0.5}, {v2(-1, 0), 0.5}};
    CHECK_THROWS_AS(LevyModel::spherical_radial(2, 1.5, line), DomainError);
    const auto degenerate = LevyModel::spherical_radial(2, 1.5, line, 1.0, MeasureCheck::AllowDegenerate);
    const auto sd = check_sector_bounds(degenerate, 10.0, 100);
    CHECK_FALSE(sd.pass);
    CHECK(sd.c1 == 0.0);
    CHECK_THROWS_AS(check_sector_bounds(iso, 10.0, 50), DomainError);
}

TEST_CASE("small jump moments") {
    const auto trunc = LevyModel::truncated_stable(1, 1.0, pm_e1());
    CHECK(small_jump_moment(trunc, 1.5) == doctest::Approx(2.0).epsilon(1e-9));
    const auto temp = LevyModel::tempered_stable(1, 1.0, pm_e1());
    const double tm = small_jump_moment(temp, 1.5);
    CHECK(tm == doctest::Approx(1.493648265624854).epsilon(1e-9));
    CHECK(tm <= 2.0);
    CHECK(std::isinf(small_jump_moment(temp, 1.0)));
    CHECK(std::isinf(small_jump_moment(trunc, 0.5)));
    double prev = std::numeric_limits<double>::infinity();
    for (double s : {1.1, 1.3, 1.7, 2.0, 3.0}) {
        const double v = small_jump_moment(temp, s);
        CHECK(v < prev);
        prev = v;
    }
    const auto rel = LevyModel::relativistic_stable(1, 1.5, 1.0);
    CHECK(small_jump_moment(rel, 1.8) < small_jump_moment(LevyModel::isotropic_stable(1, 1.5), 1.8));
}

TEST_CASE("domination of the truncated reference measure") {
    const auto temp = LevyModel::tempered_stable(1, 1.2, pm_e1());
    auto r = dominates_truncated(temp);
    CHECK(r.applicable);
    CHECK(r.pass);
    CHECK(r.reference_scale == doctest::Approx(std::exp(-1.0)));
    const auto trunc = LevyModel::truncated_stable(1, 1.2, pm_e1());
    r = dominates_truncated(trunc);
    CHECK(r.pass);
    CHECK(r.margin == doctest::Approx(0.0));
    CHECK(dominates_truncated(LevyModel::isotropic_stable(2, 1.5)).pass);
    CHECK(dominates_truncated(LevyModel::relativistic_stable(1, 1.0, 1.0)).pass);
    CHECK_FALSE(dominates_truncated(LevyModel::axis_stable(2, 1.5, {1.0})).applicable);
}

TEST_CASE("model JSON round trip is idempotent") {
    std::vector<LevyModel> models = {
        LevyModel::isotropic_stable(2, 1.5, 2.0), LevyModel::axis_stable(3, 0.8, {1.0, 2.0, 3.0}),
        LevyModel::truncated_stable(2, 1.5, quasi_uniform_sphere(2, 8, 1.0), 0.5),
        LevyModel::tempered_stable(1, 1.0, pm_e1()), LevyModel::relativistic_stable(2, 1.0, 1.5)};
    for (const auto& m : models) {
        const auto j1 = m.to_json();
        const auto j2 = LevyModel::from_json(j1).to_json();
        CHECK(j1 == j2);
    }
    nlohmann::json bad = {{"class", "Gaussian"}, {"dimension", 1}, {"alpha", 1.0}};
    CHECK_THROWS_AS(LevyModel::from_json(bad), DomainError);
    nlohmann::json bad_alpha = {{"class", "IsotropicStable"}, {"dimension", 1}, {"alpha", 2.0}};
    CHECK_THROWS_AS(LevyModel::from_json(bad_alpha), DomainError);
}
