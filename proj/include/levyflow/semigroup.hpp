#pragma once

#include "levyflow/grid_function.hpp"
#include "levyflow/levy_model.hpp"
#include "levyflow/rng.hpp"
#include "levyflow/samplers.hpp"

#include <json.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <type_traits>
#include <vector>

namespace levyflow {

// Scalar function on R^d. Lattice-backed fields clamp arguments outside their box and say so
// through the flag; analytic fields never clamp.
class Field {
public:
    using Fn = std::function<double(const Vec&, bool*)>;

    Field() = default;
    template <class F>
        requires(!std::is_same_v<std::decay_t<F>, Field> && std::is_invocable_r_v<double, F, const Vec&>)
    Field(F f, double bound = std::numeric_limits<double>::quiet_NaN(), std::string name = "custom")
        : fn_([g = std::move(f)](const Vec& x, bool*) { return static_cast<double>(g(x)); }),
          bound_(bound), name_(std::move(name)) {}

    static Field with_clamp(Fn fn, double bound, std::string name);
    // Component `comp` of a lattice function, multilinear with clamping.
    static Field from_grid(std::shared_ptr<const GridFunction> g, int comp = 0);

    double operator()(const Vec& x) const { return fn_(x, nullptr); }
    double eval(const Vec& x, bool& clamped) const { return fn_(x, &clamped); }
    // A priori bound on |f| (NaN when unknown).
    double bound() const { return bound_; }
    const std::string& name() const { return name_; }
    // Config descriptor for fields built by field_from_json (null otherwise).
    const nlohmann::json& spec() const { return spec_; }
    Field& set_spec(nlohmann::json j) {
        spec_ = std::move(j);
        return *this;
    }
    explicit operator bool() const { return static_cast<bool>(fn_); }

private:
    Fn fn_;
    double bound_ = std::numeric_limits<double>::quiet_NaN();
    std::string name_;
    nlohmann::json spec_;
};

// Shipped test functions. Every one is bounded by 1 in absolute value.
namespace test_functions {
// Indicator of the cube |x|_inf <= half_width.
Field sharp_bump(int d, double half_width = 1.0);
// exp(1 - 1/(1 - |x|^2/w^2)) inside the ball of radius w, 0 outside.
Field smooth_bump(int d, double width = 1.0);
// (1 - |x|/w)_+^beta: beta-Holder at the origin and on the sphere |x| = w.
Field holder_bump(int d, double beta, double width = 1.0);
// clamp(x_1, -1, 1)
Field ramp(int d);
Field cos_mode(const Vec& u);
Field sin_mode(const Vec& u);
// prod_k cos(freq x_k)
Field trig_product(int d, double freq = 1.0);
Field constant(int d, double c);
// Bumps at three widths, a smooth bump, the ramp and a trig product.
std::vector<Field> battery(int d);
}  // namespace test_functions

Field field_from_json(int d, const nlohmann::json& j);

struct SemigroupOptions {
    // Small-jump cut and treatment for classes without exact increments.
    double eps = 0.01;
    SmallJumpScheme scheme = SmallJumpScheme::Auto;
    // Finite-difference step of gradient_semigroup; 0 means one lattice spacing.
    double fd_step = 0.0;
    // Noise warning when the largest gradient SE exceeds this fraction of the sup norm.
    double noise_tolerance = 0.1;
};

// One batch of L_t draws shared by every node (common random numbers).
struct NoiseBatch {
    double t = 0.0;
    std::uint64_t seed = 0;
    std::vector<Vec> samples;
};

// Draws are split into fixed chunks on child streams of one seed taken from rng, so the batch
// does not depend on the thread count.
NoiseBatch draw_noise(const MarginalSampler& sampler, double t, std::size_t n, RandomStream& rng);

// R_t f on the lattice: node-wise mean of f(x + L_t) over one shared batch, with SEs.
GridFunction apply_semigroup(const LevyModel& model, const Field& f, double t, std::size_t n_mc, RandomStream& rng,
                             const Lattice& lattice, const SemigroupOptions& options = {});
// P_t f(x) = R_t(f(. + t k))(x).
GridFunction apply_shifted(const LevyModel& model, const Field& f, double t, const Vec& k, std::size_t n_mc,
                           RandomStream& rng, const Lattice& lattice, const SemigroupOptions& options = {});
// Same, on a batch drawn by the caller.
GridFunction apply_batch(const NoiseBatch& batch, const Field& f, const Vec& shift, const Lattice& lattice);

// D R_t f by central differences of width 2*fd_step on the shared batch.
GridFunction gradient_semigroup(const LevyModel& model, const Field& f, double t, std::size_t n_mc,
                                RandomStream& rng, const Lattice& lattice, const SemigroupOptions& options = {});

struct DecayOptions {
    Lattice lattice{1, 2.0, 41};
    std::size_t n_mc = 100000;
    std::uint64_t seed = 1;
    // fd_step = fd_factor * t^{1/alpha}: the stencil follows the smoothing scale of R_t.
    double fd_factor = 0.05;
    double eps = 0.01;
    double slack = 0.15;
};

struct GradientDecay {
    double alpha = 0.0;
    double slope = 0.0;
    bool pass = false;
    std::vector<double> times;
    std::vector<double> norms;
    std::vector<double> standard_errors;
    bool noise_warning = false;
    nlohmann::json to_json() const;
};

// Least-squares slope of log ||D R_t f||_0 against log t; pass iff slope >= -1/alpha - slack.
GradientDecay verify_gradient_decay(const LevyModel& model, const Field& f, const std::vector<double>& t_list,
                                    const DecayOptions& options = {});

}  // namespace levyflow
