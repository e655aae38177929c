#include <doctest.h>

#include "levyflow/sde_engine.hpp"

#include <cmath>

using namespace levyflow;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

JumpPath jump_path(double alpha, std::uint64_t seed, int n = 200) {
    RandomStream rng(seed);
    PathOptions o;
    o.scheme = SmallJumpScheme::GaussianAR;
    return PathSampler(LevyModel::isotropic_stable(1, alpha), 0.01, o).sample(1.0, n, rng);
}

std::shared_ptr<const ZvonkinTransform> synthetic(const std::function<Vec(const Vec&)>& u, double lambda, const DriftSpec& b) {
    return std::make_shared<const ZvonkinTransform>(ZvonkinTransform::synthetic(Lattice(1, 6.0, 241), u, lambda, 0.5, b));
}

}  // namespace

TEST_CASE("Euler scheme adds the noise and the drift") {
    const JumpPath path = jump_path(1.5, 3);
    REQUIRE_FALSE(path.big_jumps.empty());
    const auto values = path.values();
    const Trajectory free = euler_solve(path, DriftSpec::zero(1), v1(0.4));
    const Trajectory pushed = euler_solve(path, DriftSpec::constant(v1(-0.7)), v1(0.4));
    REQUIRE(free.values.size() == path.grid.size());
    for (std::size_t k = 0; k < path.grid.size(); ++k) {
        CHECK(free.values[k][0] == doctest::Approx(0.4 + values[k][0]).epsilon(1e-12));
        CHECK(pushed.values[k][0] == doctest::Approx(free.values[k][0] - 0.7 * path.grid[k]).epsilon(1e-12));
    }
    CHECK_THROWS_AS(euler_solve(path, DriftSpec::zero(2), Vec::Zero(2)), DomainError);
}

TEST_CASE("identity transform reproduces the Euler path") {
    const auto model = LevyModel::isotropic_stable(1, 1.5);
    const auto t = synthetic([](const Vec& x) { return zero_vec(x.size()); }, 8.0, DriftSpec::zero(1));
    const AuxiliaryCoeffs a(t, model, 1.0);
    const JumpPath path = jump_path(1.5, 5);
    const Trajectory x = euler_solve(path, DriftSpec::zero(1), v1(0.1));
    const Trajectory y = solve_auxiliary(path, a, v1(0.1));
    for (std::size_t k = 0; k < x.values.size(); ++k) CHECK(std::abs(x.values[k][0] - y.values[k][0]) < 1e-12);
    CHECK(ito_identity_check(a, path, v1(0.1)).max_defect < 1e-12);

    const auto r = transform_consistency(model, a, v1(0.1), {0.02, 0.01}, 1.0, 9, 4);
    for (double e : r.sup_errors) CHECK(e < 1e-12);
    for (double e : r.ito_defects) CHECK(e < 1e-12);
}

TEST_CASE("Ito identity for a constant transform") {
    // u = 0.1 solves lambda u - L u - b.Du = b with lambda = 8 and b = 0.8.
    const auto model = LevyModel::isotropic_stable(1, 1.5);
    const auto t = synthetic([](const Vec& x) { return Vec::Constant(x.size(), 0.1); }, 8.0, DriftSpec::constant(v1(0.8)));
    const AuxiliaryCoeffs a(t, model, 1.0);
    const JumpPath path = jump_path(1.5, 11);
    const ItoCheck c = ito_identity_check(a, path, v1(-0.3));
    CHECK(c.defect.size() == path.grid.size());
    CHECK(c.max_defect < 1e-9);

    // Y = X + 0.1 along the whole path.
    const Trajectory x = euler_solve(path, t->drift(), v1(-0.3));
    const Trajectory y = solve_auxiliary(path, a, psi_forward(*t, v1(-0.3)));
    for (std::size_t k = 0; k < x.values.size(); ++k) CHECK(std::abs(y.values[k][0] - x.values[k][0] - 0.1) < 1e-9);
}

TEST_CASE("auxiliary solver checks its inputs") {
    const auto model = LevyModel::isotropic_stable(1, 1.5);
    const auto t = synthetic([](const Vec& x) { return zero_vec(x.size()); }, 8.0, DriftSpec::zero(1));
    const AuxiliaryCoeffs narrow(t, model, 0.005);
    CHECK_THROWS_AS(solve_auxiliary(jump_path(1.5, 1), narrow, v1(0.0)), DomainError);

    RandomStream rng(2);
    const JumpPath exact = PathSampler(model, 0.01).sample(1.0, 50, rng);
    REQUIRE(exact.scheme == SmallJumpScheme::Exact);
    CHECK_THROWS_AS(ito_identity_check(AuxiliaryCoeffs(t, model, 1.0), exact, v1(0.0)), DomainError);
}

TEST_CASE("additive noise moves all starts together") {
    const auto model = LevyModel::isotropic_stable(1, 1.2);
    const std::vector<Vec> starts{v1(-1.0), v1(-0.5), v1(0.0), v1(0.5), v1(1.0)};
    FlowOptions o;
    o.n_runs = 20;
    const FlowResult r = flow_simulation(model, DriftSpec::constant(v1(0.3)), starts, 1.0, 0.01, 4, o);
    CHECK(r.order_violations == 0);
    CHECK(r.min_gap == doctest::Approx(0.5));
    CHECK(r.derivative_min == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.derivative_max == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.example.size() == starts.size());
    CHECK_THROWS_AS(flow_simulation(model, DriftSpec::zero(1), {v1(1.0), v1(0.0)}, 1.0, 0.01, 4, o), DomainError);
}

TEST_CASE("monotone drift keeps the order of starts") {
    const auto model = LevyModel::isotropic_stable(1, 1.5);
    std::vector<Vec> starts;
    for (int i = 0; i < 5; ++i) starts.push_back(v1(-1.0 + 0.5 * i));
    FlowOptions o;
    o.n_runs = 50;
    const FlowResult r = flow_simulation(model, DriftSpec::holder_power(1, 0.6), starts, 1.0, 0.01, 8, o);
    CHECK(r.order_violations == 0);
    CHECK(r.derivative_min > 0.0);
}

TEST_CASE("dispersion without drift is the start offset") {
    const auto model = LevyModel::isotropic_stable(1, 1.0);
    const auto table = uniqueness_dispersion(model, DriftSpec::zero(1), v1(0.0), {0.1, 0.01}, {0.01, 0.005}, 16, 3);
    CHECK(table.rows.size() == 4);
    for (const auto& r : table.rows) {
        CHECK(r.median == doctest::Approx(r.delta).epsilon(1e-9));
        CHECK(r.q90 == doctest::Approx(r.delta).epsilon(1e-9));
    }
    CHECK(table.at(0.01, 0.01).separated_fraction == 0.0);
    CHECK_THROWS_AS(table.at(0.2, 0.01), DomainError);
    CHECK(table.to_csv() == uniqueness_dispersion(model, DriftSpec::zero(1), v1(0.0), {0.1, 0.01}, {0.01, 0.005}, 16, 3).to_csv());
    CHECK_THROWS_AS(uniqueness_dispersion(model, DriftSpec::zero(1), v1(0.0), {0.1}, {0.03, 0.02}, 4, 3), DomainError);
}
