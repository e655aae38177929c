#pragma once

#include "levyflow/blob.hpp"
#include "levyflow/drift.hpp"
#include "levyflow/levy_model.hpp"
#include "levyflow/samplers.hpp"
#include "levyflow/zvonkin.hpp"

#include <json.hpp>

#include <vector>

namespace levyflow {

// Values on the path grid (regular cells refined at recorded jump times).
struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> values;
};

// X_{k+1} = X_k + b(X_k) dt_k + dL_k; a recorded jump enters at the end of its segment.
Trajectory euler_solve(const JumpPath& path, const DriftSpec& b, const Vec& x0);

// Y_{k+1} = Y_k + (lambda u(x) - C(x) + c) dt + (I + Du(x)) (dS - c dt), then Y += g(Y, z) at a
// recorded jump z, where x = psi^{-1}(Y_k), C(x) = int_{|z|>eps}[u(x+z) - u(x)] nu(dz) with
// eps the path's cut, c the path's compensation drift and dS its small-jump increment.
Trajectory solve_auxiliary(const JumpPath& path, const AuxiliaryCoeffs& coeffs, const Vec& y0);

struct PathSetup {
    // Cut of the recorded jumps and the treatment of the rest.
    double eps_cut = 0.01;
    SmallJumpScheme scheme = SmallJumpScheme::GaussianAR;
};

struct ConsistencyResult {
    std::vector<double> h;
    // Mean over paths of sup_t |X_t - psi^{-1}(Y_t)|, and the same for the Ito defect.
    std::vector<double> sup_errors;
    std::vector<double> ito_defects;
    std::vector<double> sup_error_se;
    std::vector<double> ito_defect_se;
    double leakage = 0.0;
    int n_paths = 0;
    nlohmann::json to_json() const;
};

// For each h (finest first or last, any order; all must divide the finest cell count), simulate X
// by euler_solve and Y by solve_auxiliary from psi(x0) on one path per repetition, coarsened from
// the finest grid so every h sees the same noise.
ConsistencyResult transform_consistency(const LevyModel& model, const AuxiliaryCoeffs& coeffs, const Vec& x0,
                                        const std::vector<double>& h_list, double T, std::uint64_t seed,
                                        int n_paths = 64, const PathSetup& setup = {});

struct ItoCheck {
    double max_defect = 0.0;
    std::vector<double> defect;
};

// Both sides of u(X_t) - u(x) = x + L_t - X_t + lambda int_0^t u(X_r) dr
//   + int int [u(X_{r-} + z) - u(X_{r-})] Ntilde(dr, dz)
// along an Euler path, the compensated integral split into recorded jumps minus their
// compensator C and the linearised small jumps Du(X) dS.
ItoCheck ito_identity_check(const AuxiliaryCoeffs& coeffs, const JumpPath& path, const Vec& x0);

struct FlowResult {
    int n_runs = 0;
    int n_starts = 0;
    // (d = 1) instances of X^{x_i}_t > X^{x_j}_t with x_i < x_j, over all runs, times and pairs.
    std::uint64_t order_violations = 0;
    // Smallest distance between trajectories of distinct starts over all times and runs.
    double min_gap = 0.0;
    // (X_T^{x+delta} - X_T^x)/delta per start, averaged over runs, and its range.
    std::vector<double> derivative_mean;
    double derivative_min = 0.0;
    double derivative_max = 0.0;
    // Trajectories of the first run, kept for plotting.
    std::vector<Trajectory> example;
    nlohmann::json to_json() const;
};

struct FlowOptions {
    int n_runs = 1;
    double derivative_delta = 1e-6;
    PathSetup path{0.01, SmallJumpScheme::Auto};
};

// All starts on one common noise path per run.
FlowResult flow_simulation(const LevyModel& model, const DriftSpec& b, const std::vector<Vec>& starts, double T,
                           double h, std::uint64_t seed, const FlowOptions& options = {});

struct DispersionRow {
    double delta = 0.0;
    double h = 0.0;
    double median = 0.0;
    double q90 = 0.0;
    // Fraction of pairs whose sup distance exceeds the separation level.
    double separated_fraction = 0.0;
};

struct DispersionTable {
    std::vector<DispersionRow> rows;
    int n_mc = 0;
    double separation_level = 0.0;
    const DispersionRow& at(double delta, double h) const;
    nlohmann::json to_json() const;
    std::string to_csv() const;
};

struct DispersionOptions {
    double T = 1.0;
    double separation_level = 0.1;
    PathSetup path{0.01, SmallJumpScheme::Auto};
};

// Median over n_mc common-noise pairs started at x0 and x0 + delta e_1 of sup_t |X - X'|.
DispersionTable uniqueness_dispersion(const LevyModel& model, const DriftSpec& b, const Vec& x0,
                                      const std::vector<double>& delta_list, const std::vector<double>& h_list,
                                      int n_mc, std::uint64_t seed, const DispersionOptions& options = {});

struct SimResult {
    std::vector<Trajectory> paths;
    nlohmann::json config;
    nlohmann::json diagnostics;
    Blob to_blob() const;
};

}  // namespace levyflow
