#include <doctest.h>

#include "levyflow/resolvent.hpp"

#include <cmath>

using namespace levyflow;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

ResolventOptions small_options() {
    ResolventOptions o;
    o.lattice = Lattice(1, 4.0, 81);
    o.n_mc = 8000;
    o.batches = 8;
    return o;
}

double max_diff(const GridFunction& a, const GridFunction& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

}  // namespace

TEST_CASE("resolvent of a constant is the constant over lambda") {
    const auto model = LevyModel::isotropic_stable(1, 1.5);
    for (double lambda : {0.5, 2.0, 16.0}) {
        const auto s = resolvent_constant_drift(model, v1(0.3), test_functions::constant(1, 2.0), lambda, small_options());
        for (double v : s.v.values()) CHECK(std::abs(v - 2.0 / lambda) < 1e-3);
        CHECK(s.dv.sup_norm() < 1e-9);
        CHECK(s.satisfies_maximum_principle());
    }
}

TEST_CASE("maximum principle over the battery") {
    const auto model = LevyModel::isotropic_stable(1, 1.2);
    for (const Field& f : test_functions::battery(1)) {
        for (double lambda : {1.0, 8.0}) {
            const auto s = resolvent_constant_drift(model, v1(1.0), f, lambda, small_options());
            CHECK_MESSAGE(s.satisfies_maximum_principle(), f.name());
            CHECK(s.error_budget > 0.0);
        }
    }
}

TEST_CASE("Cauchy resolvent of a Fourier mode") {
    // lambda v + |D| v = cos(x) has v = cos(x) / (lambda + 1).
    const auto model = LevyModel::isotropic_stable(1, 1.0);
    ResolventOptions o;
    o.lattice = Lattice(1, 3.0, 61);
    o.n_mc = 64000;
    const auto s = resolvent_constant_drift(model, zero_vec(1), test_functions::cos_mode(v1(1.0)), 1.0, o);
    double se = 0.0, err = 0.0;
    for (std::size_t i = 0; i < o.lattice.size(); ++i) {
        err = std::max(err, std::abs(s.v.at(i) - 0.5 * std::cos(o.lattice.node(i)[0])));
        se = std::max(se, s.v.standard_error()[i]);
    }
    CHECK(err < 4.0 * se + 1e-3);
}

TEST_CASE("resolvent is linear in f for a fixed seed") {
    const auto model = LevyModel::isotropic_stable(1, 1.5);
    const Field f = test_functions::smooth_bump(1, 1.0);
    const Field g = test_functions::sin_mode(v1(2.0));
    const Field h([&](const Vec& x) { return 2.0 * f(x) - g(x); }, 3.0, "combo");
    const auto o = small_options();
    const auto sf = resolvent_constant_drift(model, v1(0.2), f, 3.0, o);
    const auto sg = resolvent_constant_drift(model, v1(0.2), g, 3.0, o);
    const auto sh = resolvent_constant_drift(model, v1(0.2), h, 3.0, o);
    for (std::size_t i = 0; i < o.lattice.size(); ++i) CHECK(std::abs(sh.v.at(i) - (2.0 * sf.v.at(i) - sg.v.at(i))) < 1e-12);
}

TEST_CASE("Holder-drift solver reduces to the constant-drift solver") {
    const auto model = LevyModel::isotropic_stable(1, 1.5);
    const Field f = test_functions::smooth_bump(1, 1.0);
    const auto o = small_options();

    // b = 0: the first Picard step is already the fixed point on the same kernel.
    const auto zero = resolvent_holder_drift(model, DriftSpec::zero(1), f, 4.0, o);
    const auto ref = resolvent_constant_drift(model, zero_vec(1), f, 4.0, o);
    CHECK(max_diff(zero.v, ref.v) < 1e-12);

    // Constant b = k: Picard on the driftless kernel against the shifted kernel.
    const auto pic = resolvent_holder_drift(model, DriftSpec::constant(v1(0.5)), f, 4.0, o);
    const auto shifted = resolvent_constant_drift(model, v1(0.5), f, 4.0, o);
    CHECK(pic.contraction < 1.0);
    double se = 0.0;
    for (std::size_t i = 0; i < o.lattice.size(); ++i)
        se = std::max(se, pic.v.standard_error()[i] + shifted.v.standard_error()[i]);
    CHECK(max_diff(pic.v, shifted.v) < 4.0 * se + 2e-3);
}

TEST_CASE("Holder-drift solver guards its regime and its budget") {
    const Field f = test_functions::smooth_bump(1, 1.0);
    auto o = small_options();
    CHECK_THROWS_AS(resolvent_holder_drift(LevyModel::isotropic_stable(1, 0.5), DriftSpec::holder_power(1, 0.3), f, 4.0, o),
                    DomainError);
    o.check_regime = false;
    CHECK_NOTHROW(resolvent_holder_drift(LevyModel::isotropic_stable(1, 0.9), DriftSpec::holder_power(1, 0.6), f, 8.0, o));

    o.check_regime = true;
    o.refuse_above = 1e-6;
    try {
        resolvent_holder_drift(LevyModel::isotropic_stable(1, 1.5), DriftSpec::holder_power(1, 0.6, 2.0, 2.0), f, 2.0, o);
        FAIL("expected a refusal");
    } catch (const BudgetError& e) {
        CHECK(e.suggestion() > 2.0);
    }
}

TEST_CASE("gradient of the Holder-drift solution shrinks with lambda") {
    const auto model = LevyModel::isotropic_stable(1, 1.5);
    const auto b = DriftSpec::holder_power(1, 0.6);
    const auto o = small_options();
    double prev = INFINITY;
    for (double lambda : {4.0, 16.0, 64.0}) {
        const auto s = resolvent_holder_drift(model, b, test_functions::smooth_bump(1, 1.0), lambda, o);
        CHECK(s.dv_norm < prev);
        CHECK(s.satisfies_maximum_principle());
        prev = s.dv_norm;
    }
}

TEST_CASE("generator residual in a wide box") {
    const auto model = LevyModel::isotropic_stable(1, 1.5);
    ResolventOptions o;
    o.lattice = Lattice(1, 24.0, 961);
    o.n_mc = 32000;
    const Field f = test_functions::smooth_bump(1, 1.0);
    const auto s = resolvent_constant_drift(model, zero_vec(1), f, 2.0, o);
    const double r = generator_residual(model, s, {f}, [](const Vec& x) { return zero_vec(x.size()); }, 400);
    CHECK(r < 0.05);
}

TEST_CASE("Schauder ratio bookkeeping") {
    const auto model = LevyModel::isotropic_stable(1, 1.2);
    auto o = small_options();
    o.beta = 0.6;
    const Field f = test_functions::holder_bump(1, 0.6, 1.0);
    const auto one = verify_schauder_k_independence(model, f, 64.0, {v1(3.0)}, o);
    CHECK(one.spread == doctest::Approx(1.0));
    CHECK(one.pass);
    CHECK(one.ratios.size() == 1);
    CHECK(one.k_norms[0] == doctest::Approx(3.0));
    CHECK_THROWS_AS(verify_schauder_k_independence(model, test_functions::constant(1, 0.0), 64.0, {v1(0.0)}, o), DomainError);
}
