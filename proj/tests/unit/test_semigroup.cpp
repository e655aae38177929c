#include <doctest.h>

#include "levyflow/semigroup.hpp"

#include <cmath>

using namespace levyflow;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

double max_z(const GridFunction& g, const std::function<double(const Vec&)>& exact) {
    double z = 0.0;
    for (std::size_t i = 0; i < g.lattice().size(); ++i) {
        const double se = std::max(g.standard_error()[i], 1e-12);
        z = std::max(z, std::abs(g.at(i) - exact(g.lattice().node(i))) / se);
    }
    return z;
}

}  // namespace

TEST_CASE("lattice interpolation is exact at nodes") {
    const Lattice lat(2, 1.5, 13);
    const GridFunction g = GridFunction::sample(lat, [](const Vec& x) { return std::sin(3.0 * x[0]) + x[1] * x[1]; });
    for (std::size_t i = 0; i < lat.size(); ++i) {
        double out = 0.0;
        CHECK_FALSE(g.interpolate(lat.node(i), &out));
        CHECK(out == g.at(i));
    }
    Vec far(2);
    far << 2.0, 0.0;
    double out = 0.0;
    CHECK(g.interpolate(far, &out));
    double mx = 0.0;
    for (double v : g.values()) mx = std::max(mx, std::abs(v));
    CHECK(g.sup_norm() == mx);
}

TEST_CASE("lattice function blob round trip") {
    const Lattice lat(1, 2.0, 9);
    GridFunction g = GridFunction::sample_vector(lat, 2, [](const Vec& x) {
        Vec v(2);
        v << x[0], -x[0] * x[0];
        return v;
    });
    g.standard_error().assign(g.values().size(), 0.25);
    g.provenance().n_mc = 7;
    const GridFunction h = GridFunction::from_blob(decode_blob(encode_blob(g.to_blob())));
    CHECK(h.lattice() == lat);
    CHECK(h.values() == g.values());
    CHECK(h.standard_error() == g.standard_error());
    CHECK(h.provenance().n_mc == 7);
}

TEST_CASE("Holder seminorm estimator") {
    const Lattice lat(1, 1.0, 41);
    CHECK(estimate_holder_seminorm(GridFunction::sample(lat, [](const Vec&) { return 3.0; }), 0.5) == 0.0);
    CHECK(estimate_holder_seminorm(GridFunction::sample(lat, [](const Vec& x) { return x[0]; }), 1.0) ==
          doctest::Approx(1.0).epsilon(1e-12));

    const Lattice small(1, 1.0, 81);
    const GridFunction g = GridFunction::sample(small, [](const Vec& x) { return std::sqrt(std::abs(x[0])); });
    double brute = 0.0;
    for (std::size_t a = 0; a < small.size(); ++a)
        for (std::size_t b = a + 2; b < small.size(); ++b) {
            const double dist = std::abs(small.node(a)[0] - small.node(b)[0]);
            brute = std::max(brute, std::abs(g.at(a) - g.at(b)) / std::sqrt(dist));
        }
    const double est = estimate_holder_seminorm(g, 0.5);
    CHECK(est <= brute + 1e-12);
    CHECK(est >= 0.95 * brute);
    CHECK(est >= 0.9);
    CHECK(est <= std::sqrt(2.0) + 1e-12);
}

TEST_CASE("lattice gradient of a linear field") {
    const Lattice lat(2, 1.0, 11);
    const GridFunction g = GridFunction::sample(lat, [](const Vec& x) { return 2.0 * x[0] - 0.5 * x[1]; });
    const GridFunction dg = lattice_gradient(g);
    CHECK(dg.rows() == 1);
    CHECK(dg.cols() == 2);
    for (std::size_t i = 0; i < lat.size(); ++i) {
        CHECK(dg.at(i, 0) == doctest::Approx(2.0));
        CHECK(dg.at(i, 1) == doctest::Approx(-0.5));
    }
}

TEST_CASE("semigroup on constants and at t = 0") {
    const auto model = LevyModel::isotropic_stable(1, 1.3);
    const Lattice lat(1, 2.0, 21);
    RandomStream rng(3);
    const GridFunction one = apply_semigroup(model, test_functions::constant(1, 1.0), 0.7, 5000, rng, lat);
    for (double v : one.values()) CHECK(v == 1.0);
    const Field f = test_functions::smooth_bump(1, 1.0);
    const GridFunction r0 = apply_semigroup(model, f, 0.0, 10, rng, lat);
    for (std::size_t i = 0; i < lat.size(); ++i) CHECK(r0.at(i) == f(lat.node(i)));
    CHECK_THROWS_AS(apply_semigroup(model, f, 0.5, 0, rng, lat), DomainError);
}

TEST_CASE("Cauchy semigroup on a Fourier mode") {
    const auto model = LevyModel::isotropic_stable(1, 1.0);
    const Lattice lat(1, 3.0, 25);
    RandomStream rng(5);
    const double t = 0.6;
    const GridFunction g = apply_semigroup(model, test_functions::cos_mode(v1(1.0)), t, 40000, rng, lat);
    CHECK(max_z(g, [t](const Vec& x) { return std::exp(-t) * std::cos(x[0]); }) < 3.0);
}

TEST_CASE("drift-shifted semigroup") {
    const auto model = LevyModel::isotropic_stable(1, 1.0);
    const Lattice lat(1, 3.0, 25);
    const Field f = test_functions::cos_mode(v1(1.0));
    RandomStream a(9), b(9);
    const GridFunction plain = apply_semigroup(model, f, 0.4, 3000, a, lat);
    const GridFunction zero_k = apply_shifted(model, f, 0.4, v1(0.0), 3000, b, lat);
    CHECK(plain.values() == zero_k.values());

    RandomStream c(10);
    const GridFunction one = apply_shifted(model, test_functions::constant(1, 1.0), 0.4, v1(5.0), 1000, c, lat);
    for (double v : one.values()) CHECK(v == 1.0);

    RandomStream e(11);
    const double t = 0.5;
    const GridFunction g = apply_shifted(model, f, t, v1(1.0), 40000, e, lat);
    CHECK(max_z(g, [t](const Vec& x) { return std::exp(-t) * std::cos(x[0] + t); }) < 3.0);
}

TEST_CASE("semigroup gradient") {
    const auto model = LevyModel::isotropic_stable(1, 1.0);
    const Lattice lat(1, 2.0, 21);
    RandomStream rng(21);
    const GridFunction zero = gradient_semigroup(model, test_functions::constant(1, 1.0), 0.3, 1000, rng, lat);
    for (double v : zero.values()) CHECK(v == 0.0);

    const double t = 0.5;
    SemigroupOptions opt;
    opt.fd_step = 0.01;
    const GridFunction g = gradient_semigroup(model, test_functions::sin_mode(v1(1.0)), t, 40000, rng, lat, opt);
    const std::size_t mid = 10;
    CHECK(lat.node(mid)[0] == 0.0);
    const double exact = std::exp(-t) * std::sin(0.01) / 0.01;
    CHECK(std::abs(g.at(mid) - exact) < 3.0 * g.standard_error()[mid]);

    double prev = 1e300;
    for (double tt : {1.0, 4.0, 16.0}) {
        const GridFunction r = gradient_semigroup(model, test_functions::ramp(1), tt, 20000, rng, lat);
        CHECK(r.sup_norm() < prev);
        prev = r.sup_norm();
    }
    CHECK(prev < 0.05);
}

TEST_CASE("gradient decay slopes") {
    DecayOptions opt;
    opt.n_mc = 20000;
    const std::vector<double> times{0.01, 0.03, 0.1, 0.3, 1.0};
    const auto stable = LevyModel::isotropic_stable(1, 1.5);
    const auto r = verify_gradient_decay(stable, test_functions::sharp_bump(1, 1.0), times, opt);
    CHECK(r.pass);
    CHECK(std::abs(r.slope + 2.0 / 3.0) < 0.1);

    const auto rel = LevyModel::relativistic_stable(1, 1.0, 1.0);
    CHECK(verify_gradient_decay(rel, test_functions::sharp_bump(1, 1.0), times, opt).pass);

    CHECK_THROWS_AS(verify_gradient_decay(stable, test_functions::constant(1, 1.0), times, opt), DomainError);
    CHECK_THROWS_AS(verify_gradient_decay(stable, test_functions::ramp(1), {0.1, 0.2}, opt), DomainError);
}

TEST_CASE("contraction, positivity and the semigroup law") {
    const auto model = LevyModel::isotropic_stable(1, 1.5);
    const Lattice lat(1, 4.0, 33);
    RandomStream rng(33);
    for (const Field& f : test_functions::battery(1)) {
        const GridFunction g = apply_semigroup(model, f, 0.3, 4000, rng, lat);
        CHECK(g.sup_norm() <= 1.0 + 3.0 * g.max_standard_error());
        bool nonneg = true;
        for (std::size_t i = 0; i < lat.size(); ++i) nonneg = nonneg && g.at(i) >= -3.0 * g.standard_error()[i];
        if (f.name() != "ramp" && f.name() != "trig_product") CHECK(nonneg);
    }

    const Field f = test_functions::smooth_bump(1, 1.5);
    const std::size_t n = 40000;
    const GridFunction direct = apply_semigroup(model, f, 0.5, n, rng, lat);
    auto inner = std::make_shared<const GridFunction>(apply_semigroup(model, f, 0.2, n, rng, Lattice(1, 12.0, 481)));
    const GridFunction composed = apply_semigroup(model, Field::from_grid(inner), 0.3, n, rng, lat);
    double diff = 0.0;
    for (std::size_t i = 0; i < lat.size(); ++i) diff = std::max(diff, std::abs(direct.at(i) - composed.at(i)));
    const double tol = 4.0 * (direct.max_standard_error() + composed.max_standard_error() + inner->max_standard_error()) + 2e-3;
    CHECK(diff < tol);
    CHECK(composed.provenance().out_of_box_fraction < 0.01);
}

TEST_CASE("same seed gives identical bits") {
    const auto model = LevyModel::tempered_stable(1, 1.2, {{v1(1.0), 0.5}, {v1(-1.0), 0.5}});
    const Lattice lat(1, 2.0, 17);
    RandomStream a(77), b(77);
    const auto ga = apply_semigroup(model, test_functions::sharp_bump(1, 0.5), 0.2, 5000, a, lat);
    const auto gb = apply_semigroup(model, test_functions::sharp_bump(1, 0.5), 0.2, 5000, b, lat);
    CHECK(ga.values() == gb.values());
    CHECK(ga.standard_error() == gb.standard_error());
}
