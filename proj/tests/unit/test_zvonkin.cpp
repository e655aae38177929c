#include <doctest.h>

#include "levyflow/zvonkin.hpp"

#include <cmath>

using namespace levyflow;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

TransformOptions quick_options() {
    TransformOptions o;
    o.resolvent.lattice = Lattice(1, 6.0, 241);
    o.resolvent.n_mc = 8000;
    o.resolvent.batches = 8;
    o.resolvent.tol = 1e-3;
    return o;
}

std::shared_ptr<const ZvonkinTransform> linear(double c) {
    return std::make_shared<const ZvonkinTransform>(ZvonkinTransform::synthetic(
        Lattice(1, 6.0, 241), [c](const Vec& x) { return Vec(c * x); }, 8.0, 0.5, DriftSpec::holder_power(1, 0.6)));
}

}  // namespace

TEST_CASE("zero drift gives the identity transform") {
    const auto t = build_transform(LevyModel::isotropic_stable(1, 1.5), DriftSpec::zero(1), quick_options());
    CHECK(t.lambda() == 2.0);
    CHECK(t.c_lambda() == 0.0);
    for (double y : {-2.0, 0.0, 0.7}) CHECK(psi_inverse(t, v1(y))[0] == y);
}

TEST_CASE("linear transform in closed form") {
    const auto t = linear(0.2);
    CHECK(t->c_lambda() == doctest::Approx(0.2));
    for (double x : {-3.0, -0.55, 0.0, 1.3, 4.9}) {
        CHECK(psi_forward(*t, v1(x))[0] == doctest::Approx(1.2 * x));
        const auto inv = psi_inverse_detail(*t, v1(x));
        CHECK(std::abs(inv.x[0] - x / 1.2) < 1e-12);
        CHECK(inv.max_ratio <= 0.2 + 1e-3);
        CHECK(dpsi_inverse(*t, v1(x))(0, 0) == doctest::Approx(1.0 / 1.2).epsilon(1e-12));
    }
    CHECK(dpsi_inverse_holder(*t, 500) < 1e-9);
}

TEST_CASE("transform gate and round trip") {
    const Lattice lat(1, 6.0, 241);
    const auto b = DriftSpec::holder_power(1, 0.6);
    CHECK_THROWS_AS(ZvonkinTransform::synthetic(lat, [](const Vec& x) { return Vec(0.4 * x); }, 8.0, 0.5, b), DomainError);
    const auto t = ZvonkinTransform::synthetic(lat, [](const Vec& x) { return Vec(0.25 * x.array().sin().matrix()); }, 8.0, 0.5, b);
    CHECK(t.c_lambda() < 0.26);
    double err = 0.0;
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const Vec x = lat.node(i);
        err = std::max(err, (psi_inverse(t, psi_forward(t, x)) - x).norm());
        CHECK(dpsi_inverse(t, x).norm() <= 1.0 / (1.0 - t.c_lambda()) + 1e-12);
    }
    CHECK(err < 1e-10);
}

TEST_CASE("built transform passes the gate and survives a blob round trip") {
    const auto model = LevyModel::isotropic_stable(1, 1.5);
    const auto t = build_transform(model, DriftSpec::holder_power(1, 0.6), quick_options());
    CHECK(t.c_lambda() < 1.0 / 3.0);
    REQUIRE_FALSE(t.curve().empty());
    CHECK(t.curve().back().lambda == t.lambda());
    for (std::size_t i = 0; i + 1 < t.curve().size(); ++i) CHECK((t.curve()[i].refused || t.curve()[i].c_lambda >= 1.0 / 3.0));

    const auto back = ZvonkinTransform::from_blobs(decode_blob(encode_blob(t.u_blob())), t.to_json());
    CHECK(back.u().values() == t.u().values());
    CHECK(back.lambda() == t.lambda());
    CHECK(back.c_lambda() == t.c_lambda());
}

TEST_CASE("transform construction guards its regime") {
    const auto o = quick_options();
    CHECK_THROWS_AS(build_transform(LevyModel::isotropic_stable(1, 0.5), DriftSpec::holder_power(1, 0.3), o), DomainError);
    CHECK_THROWS_AS(build_transform(LevyModel::isotropic_stable(1, 1.2), DriftSpec::holder_power(1, 0.3), o), DomainError);
}

TEST_CASE("auxiliary coefficients for a vanishing transform") {
    const auto model = LevyModel::isotropic_stable(1, 1.5);
    const auto t = linear(0.0);
    const AuxiliaryCoeffs a(t, model, 0.5);
    for (double y : {-1.0, 0.0, 2.5}) {
        CHECK(a.g(v1(y), v1(0.3))[0] == doctest::Approx(0.3));
        CHECK(a.g(v1(y), v1(0.0))[0] == 0.0);
        CHECK(std::abs(a.btilde(v1(y))[0]) < 1e-12);
        CHECK(a.jump_compensator_at(v1(y), 0.1)[0] == 0.0);
    }
    CHECK(std::abs(a.mid_jump_mean(0.1)[0]) < 1e-12);
    CHECK(a.btilde_lipschitz(50) < 1e-9);
}

TEST_CASE("auxiliary coefficients for a linear transform") {
    const auto model = LevyModel::isotropic_stable(1, 1.5);
    const auto t = linear(0.2);
    const AuxiliaryCoeffs a(t, model, 1.0);
    // psi(x) = 1.2 x, so g(y, z) = 1.2 z and the symmetric compensator vanishes at the centre.
    CHECK(a.g(v1(0.6), v1(-0.5))[0] == doctest::Approx(-0.6));
    CHECK(std::abs(a.jump_compensator_at(v1(0.0), 0.05)[0]) < 1e-6);
    // btilde(y) = 8 u(y/1.2) minus a compensator that grows only through clamping.
    CHECK(a.btilde(v1(1.2))[0] == doctest::Approx(1.6).epsilon(0.05));
    CHECK(a.small_jump_lipschitz(20) < 1e-4);
    CHECK_THROWS_AS(AuxiliaryCoeffs(t, model, 1.5), DomainError);
}
