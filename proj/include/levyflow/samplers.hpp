#pragma once

#include "levyflow/blob.hpp"
#include "levyflow/core.hpp"
#include "levyflow/levy_model.hpp"
#include "levyflow/rng.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace levyflow {

enum class SmallJumpScheme { Auto, Exact, GaussianAR, Drop };

std::string to_string(SmallJumpScheme s);
SmallJumpScheme small_jump_scheme_from_string(const std::string& s);

// Symmetric alpha-stable variate with characteristic function exp(-scale*dt*|u|^alpha)
// (Chambers-Mallows-Stuck).
double sample_stable_increment(double alpha, double scale, double dt, RandomStream& rng);
// Positive a-stable variate with Laplace transform exp(-s^a), a in (0,1) (Kanter).
double sample_positive_stable(double a, RandomStream& rng);
// Rotation invariant increment with characteristic function exp(-scale*dt*|u|^alpha).
Vec sample_isotropic_stable_increment(int d, double alpha, double scale, double dt, RandomStream& rng);
// Increment with characteristic function exp(-dt*((|u|^2 + m^{2/alpha})^{alpha/2} - m)).
Vec sample_relativistic_increment(int d, double alpha, double m, double dt, RandomStream& rng);

// Jumps of size > eps: compound Poisson intensity, jump law, and the matched small-jump
// statistics of the remainder.
class JumpLaw {
public:
    JumpLaw(const LevyModel& model, double eps);

    double eps() const { return eps_; }
    double intensity() const { return intensity_; }
    Vec sample_jump(RandomStream& rng) const;
    double sample_radius(RandomStream& rng) const;
    // int_{|z|<=eps} z z^T nu(dz) and its symmetric square root.
    const Mat& small_covariance() const { return cov_; }
    const Mat& small_covariance_sqrt() const { return cov_sqrt_; }
    // int_{|z|<=eps} |z|^2 nu(dz)
    double small_second_moment() const { return second_moment_; }
    // -int_{eps<|z|<=1} z nu(dz): drift making the decomposition match the triple.
    const Vec& compensation_drift() const { return drift_; }
    // sigma(eps)/eps with sigma(eps)^2 = small_second_moment().
    double gaussian_validity_ratio() const;

private:
    LevyModel model_;
    double eps_;
    double intensity_ = 0.0;
    Mat cov_, cov_sqrt_;
    double second_moment_ = 0.0;
    Vec drift_;
    std::vector<double> dir_cumulative_;
    std::shared_ptr<const std::function<double(double)>> radius_table_;
};

// Validity threshold of the Gaussian small-jump substitution used by the auto scheme.
inline constexpr double kGaussianValidityRatio = 3.0;

SmallJumpScheme resolve_scheme(const LevyModel& model, SmallJumpScheme requested, const JumpLaw& law);

// Draws L_t for a fixed model; exact where the class allows it, otherwise jumps above eps plus
// the selected small-jump treatment.
class MarginalSampler {
public:
    MarginalSampler(const LevyModel& model, double eps = 0.01, SmallJumpScheme scheme = SmallJumpScheme::Auto);
    Vec sample(double t, RandomStream& rng) const;
    SmallJumpScheme scheme() const { return scheme_; }
    const JumpLaw& law() const { return law_; }
    const LevyModel& model() const { return model_; }

private:
    LevyModel model_;
    JumpLaw law_;
    SmallJumpScheme scheme_;
};

Vec sample_exact_increment(const LevyModel& model, double dt, RandomStream& rng);

struct PathOptions {
    SmallJumpScheme scheme = SmallJumpScheme::Auto;
    double max_expected_jumps = 1e7;
};

struct RecordedJump {
    double time = 0.0;
    Vec z;
    std::size_t segment = 0;
};

struct JumpPath {
    int dimension = 1;
    double horizon = 0.0;
    // Regular cells the horizon was split into; jump times refine the grid further.
    int n_cells = 0;
    std::vector<double> grid;
    std::vector<Vec> increments;
    // Increments without the recorded big jumps (compensation drift included).
    std::vector<Vec> small_increments;
    std::vector<int> cell;
    // Index into big_jumps of the jump applied at the end of each segment, or -1.
    std::vector<int> jump_at_end;
    std::vector<RecordedJump> big_jumps;

    double eps_cut = 0.0;
    SmallJumpScheme scheme = SmallJumpScheme::Exact;
    Vec compensation_drift;
    double drop_error_bound = 0.0;
    std::uint64_t seed = 0;
    nlohmann::json model;

    std::size_t segments() const { return increments.size(); }
    double dt(std::size_t k) const { return grid[k + 1] - grid[k]; }
    std::vector<Vec> values() const;
    JumpPath coarsen(int factor) const;
    Blob to_blob() const;
    static JumpPath from_blob(const Blob& blob);
};

// Reusable path generator: the jump law (and its radial tables) is built once.
class PathSampler {
public:
    PathSampler(const LevyModel& model, double eps_cut, const PathOptions& options = {});
    JumpPath sample(double T, int n_steps, RandomStream& rng) const;
    const JumpLaw& law() const { return law_; }
    SmallJumpScheme scheme() const { return scheme_; }

private:
    LevyModel model_;
    JumpLaw law_;
    PathOptions options_;
    SmallJumpScheme scheme_;
};

JumpPath sample_path(const LevyModel& model, double T, int n_steps, double eps_cut, RandomStream& rng,
                     const PathOptions& options = {});

// Smallest cut (by bisection) whose expected number of big jumps over T fits the budget.
double suggest_eps_cut(const LevyModel& model, double T, double max_expected_jumps);

struct CfProbeResult {
    Vec u;
    double deviation = 0.0;
    double se = 0.0;
    double bias_bound = 0.0;
};

struct CfCheck {
    double max_abs_deviation = 0.0;
    double se_at_max = 0.0;
    bool pass = false;
    std::vector<CfProbeResult> probes;
};

CfCheck empirical_cf_check(const LevyModel& model, double t, const std::vector<Vec>& u_probes,
                           std::size_t n_samples, RandomStream& rng, double eps = 0.05,
                           SmallJumpScheme scheme = SmallJumpScheme::Auto);

}  // namespace levyflow
