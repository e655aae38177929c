#pragma once

#include "levyflow/drift.hpp"
#include "levyflow/grid_function.hpp"
#include "levyflow/levy_model.hpp"
#include "levyflow/resolvent.hpp"

#include <json.hpp>

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace levyflow {

struct LambdaStep {
    double lambda = 0.0;
    double c_lambda = 0.0;
    bool refused = false;
    int iterations = 0;
    double contraction = 0.0;
    double seconds = 0.0;
};

// Schedule exhausted before the gate c_lambda < 1/3; carries the measured curve.
class ScheduleExhausted : public ConvergenceError {
public:
    ScheduleExhausted(const std::string& what, std::vector<LambdaStep> curve, double last)
        : ConvergenceError(what, last), curve_(std::move(curve)) {}
    const std::vector<LambdaStep>& curve() const { return curve_; }

private:
    std::vector<LambdaStep> curve_;
};

struct TransformOptions {
    // Lattice of u; three times the simulation box by default.
    ResolventOptions resolvent = default_resolvent();
    std::vector<double> lambda_schedule{2, 4, 8, 16, 32, 64, 128, 256, 512, 1024};
    bool allow_counterexample = false;

    static ResolventOptions default_resolvent() {
        ResolventOptions o;
        o.lattice = Lattice(1, 6.0, 481);
        o.n_mc = 16000;
        o.tol = 1e-4;
        return o;
    }
};

struct InverseResult {
    Vec x;
    int iterations = 0;
    // Largest observed |x_{n+1} - x_n| / |x_n - x_{n-1}|.
    double max_ratio = 0.0;
};

// psi = id + u with u solving lambda u - L u - Du b = b componentwise.
class ZvonkinTransform {
public:
    ZvonkinTransform(GridFunction u, double lambda, double gamma, DriftSpec drift);
    // Test hook: u sampled from a closed form (gate still enforced).
    static ZvonkinTransform synthetic(const Lattice& lattice, const std::function<Vec(const Vec&)>& u, double lambda,
                                      double gamma, const DriftSpec& drift);

    const GridFunction& u() const { return u_; }
    const GridFunction& du() const { return du_; }
    double lambda() const { return lambda_; }
    double c_lambda() const { return c_lambda_; }
    double gamma() const { return gamma_; }
    const DriftSpec& drift() const { return drift_; }
    int dimension() const { return u_.lattice().dim; }
    std::vector<LambdaStep>& curve() { return curve_; }
    const std::vector<LambdaStep>& curve() const { return curve_; }
    nlohmann::json& info() { return info_; }
    const nlohmann::json& info() const { return info_; }

    Vec u_at(const Vec& x) const;
    Mat du_at(const Vec& x) const;
    // Fraction of u evaluations that fell outside the lattice box.
    double leakage() const;

    Blob u_blob() const { return u_.to_blob(); }
    Blob du_blob() const { return du_.to_blob(); }
    nlohmann::json to_json() const;
    static ZvonkinTransform from_blobs(const Blob& u, const nlohmann::json& meta);

private:
    GridFunction u_;
    GridFunction du_;
    double lambda_ = 0.0;
    double c_lambda_ = 0.0;
    double gamma_ = 0.0;
    DriftSpec drift_;
    std::vector<LambdaStep> curve_;
    nlohmann::json info_ = nlohmann::json::object();
    std::shared_ptr<std::atomic<std::uint64_t>> evaluations_ = std::make_shared<std::atomic<std::uint64_t>>(0);
    std::shared_ptr<std::atomic<std::uint64_t>> clamped_ = std::make_shared<std::atomic<std::uint64_t>>(0);
};

// Walks the schedule until c_lambda = ||Du_lambda||_0 < 1/3 and returns that transform.
ZvonkinTransform build_transform(const LevyModel& model, const DriftSpec& b, const TransformOptions& options = {});

Vec psi_forward(const ZvonkinTransform& t, const Vec& x);
// Fixed point x = y - u(x); stops at |x_{n+1} - x_n| < tol (1 - c_lambda), at most 100 steps.
InverseResult psi_inverse_detail(const ZvonkinTransform& t, const Vec& y, double tol = 1e-12);
Vec psi_inverse(const ZvonkinTransform& t, const Vec& y, double tol = 1e-12);
// (I + Du(psi^{-1}(z)))^{-1} by its Neumann series.
Mat dpsi_inverse(const ZvonkinTransform& t, const Vec& z);
// Sampled gamma-Holder seminorm of D psi^{-1} over pairs at least two spacings apart in the
// middle third of the box.
double dpsi_inverse_holder(const ZvonkinTransform& t, int probe_pairs, std::uint64_t seed = 7);

// Coefficients of the equation solved by Y = psi(X):
//   dY = btilde_r(Y) dt + int_{|z|<=r} g(Y,z) Ntilde + int_{|z|>r} g(Y,z) N,
//   g(y,z) = psi(psi^{-1}(y) + z) - y,
//   btilde_r(y) = lambda u(x) - int_{|z|>r} (g(y,z) - z) nu(dz) - int_{r<|z|<=1} z nu(dz),  x = psi^{-1}(y).
class AuxiliaryCoeffs {
public:
    AuxiliaryCoeffs(std::shared_ptr<const ZvonkinTransform> t, const LevyModel& model, double r);

    double r() const { return r_; }
    const ZvonkinTransform& transform() const { return *t_; }
    const LevyModel& model() const { return model_; }

    Vec g(const Vec& y, const Vec& z) const;
    Vec btilde(const Vec& y) const;
    // int_{|z|>rho} [u(x+z) - u(x)] nu(dz) at a point x of the original space, tabulated on the
    // u lattice once per rho and interpolated.
    Vec jump_compensator_at(const Vec& x, double rho) const;
    // int_{rho<|z|<=1} z nu(dz)
    Vec mid_jump_mean(double rho) const;

    // Sampled sup of int_{|z|<=1} |g(y,z) - g(y',z)|^2 nu(dz) / |y - y'|^2.
    double small_jump_lipschitz(int pairs, std::uint64_t seed = 11) const;
    // Sampled sup of |btilde(y) - btilde(y')| / |y - y'|.
    double btilde_lipschitz(int pairs, std::uint64_t seed = 13) const;

private:
    const GridFunction& compensator_table(double rho) const;

    std::shared_ptr<const ZvonkinTransform> t_;
    LevyModel model_;
    double r_;
    mutable std::mutex mutex_;
    mutable std::map<double, std::shared_ptr<const GridFunction>> tables_;
};

}  // namespace levyflow
