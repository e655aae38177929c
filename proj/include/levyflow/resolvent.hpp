#pragma once

#include "levyflow/drift.hpp"
#include "levyflow/grid_function.hpp"
#include "levyflow/levy_model.hpp"
#include "levyflow/samplers.hpp"
#include "levyflow/semigroup.hpp"

#include <json.hpp>

#include <functional>
#include <vector>

namespace levyflow {

struct ResolventOptions {
    Lattice lattice{1, 6.0, 241};
    // Noise draws behind the kernel, split evenly over the batches used for standard errors.
    std::size_t n_mc = 32000;
    int batches = 16;
    // Dyadic time levels [T* 2^{-j-1}, T* 2^{-j}], Gauss-Legendre on each.
    int levels = 30;
    int gauss_nodes = 8;
    double tol = 1e-3;
    // Small-jump cut and treatment for classes without exact increments.
    double eps = 0.05;
    SmallJumpScheme scheme = SmallJumpScheme::Auto;
    // Half width of the cloud-in-cell part of the kernel; 0 means twice the lattice half width.
    double kernel_half_width = 0.0;
    // Samples beyond the cloud-in-cell window kept per batch (systematic thinning above this).
    std::size_t far_cap = 1024;
    std::uint64_t seed = 1;
    // Holder exponent of the data; the gradient seminorm uses theta = alpha + beta_eff - 1.
    double beta = 0.5;
    int max_iterations = 80;
    // Picard refuses when the measured contraction factor reaches this value.
    double refuse_above = 1.0;
    // Contraction factor the lambda suggestion aims for.
    double target_contraction = 0.9;
    int seminorm_margin = 0;
    bool check_regime = true;
};

// Exponent actually used for the drift: when alpha + beta >= 2 the drift is treated as
// beta_eff-Holder with beta_eff = min(beta, 1.5 - 0.75 alpha), which keeps alpha + beta_eff in (1, 2).
double effective_beta(double alpha, double beta);

// Monte Carlo estimate of the occupation measure K(dy) = int_0^T* e^{-lambda t} P(t k + L_t in dy) dt,
// so that v = K * f. Near samples are deposited cloud-in-cell on the lattice spacing, far samples
// are kept as weighted points. One kernel per batch.
class OccupationKernel {
public:
    OccupationKernel(const LevyModel& model, const Vec& k, double lambda, const ResolventOptions& options);

    // Writes every component of f(x) into out and returns whether x was clamped.
    using Evaluator = std::function<bool(const Vec&, double*)>;
    struct Output {
        // batches x (nodes * components)
        std::vector<std::vector<double>> values;
        double out_of_box_fraction = 0.0;
    };
    Output apply(const Evaluator& f, int components) const;

    const Lattice& lattice() const { return lattice_; }
    double lambda() const { return lambda_; }
    double t_star() const { return t_star_; }
    // e^{-lambda T*}/lambda: mass of the truncated time tail.
    double tail_mass() const { return std::exp(-lambda_ * t_star_) / lambda_; }
    // Shortest time resolved; mass below it sits at the origin.
    double t_min() const { return t_min_; }
    int batches() const { return static_cast<int>(batches_.size()); }
    std::size_t far_points() const;
    std::uint64_t seed() const { return seed_; }

private:
    struct Batch {
        std::vector<std::pair<long, double>> near;  // (offset into the extended lattice, weight)
        std::vector<Vec> far_points;
        std::vector<double> far_weights;
    };

    Lattice lattice_;
    int dim_ = 1;
    int half_cells_ = 0;
    double lambda_ = 1.0;
    double t_star_ = 0.0;
    double t_min_ = 0.0;
    std::uint64_t seed_ = 0;
    std::vector<Batch> batches_;
};

struct ResolventSolution {
    GridFunction v;
    GridFunction dv;
    double lambda = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double theta = 0.0;
    double v_norm = 0.0;
    double dv_norm = 0.0;
    double dv_seminorm = 0.0;
    double f_norm = 0.0;
    // Successive C^1 distances of the Picard iterates (empty for constant drift).
    std::vector<double> residuals;
    double contraction = 0.0;
    int iterations = 0;
    // Bound on sup|v - v_exact| from time truncation, Monte Carlo (3 SE) and Picard stopping.
    double error_budget = 0.0;
    double out_of_box_fraction = 0.0;
    bool noise_warning = false;
    double t_star = 0.0;

    bool satisfies_maximum_principle() const { return lambda * v_norm <= f_norm + lambda * error_budget; }
    nlohmann::json diagnostics() const;
};

// v = int_0^inf e^{-lambda t} P_t f dt for the generator L + k.D.
ResolventSolution resolvent_constant_drift(const LevyModel& model, const Vec& k, const Field& f, double lambda,
                                           const ResolventOptions& options = {});

// lambda v - L v - b.Dv = f, componentwise for several right-hand sides, by Picard iteration
// v_{n+1} = R_lambda(f + b.Dv_n) on one shared kernel. Refuses with a BudgetError carrying a
// larger lambda when the measured contraction factor is not below options.refuse_above.
ResolventSolution resolvent_holder_drift(const LevyModel& model, const DriftSpec& b, const std::vector<Field>& f,
                                         double lambda, const ResolventOptions& options = {});
ResolventSolution resolvent_holder_drift(const LevyModel& model, const DriftSpec& b, const Field& f, double lambda,
                                         const ResolventOptions& options = {});

// max over interior nodes and components of |lambda v - drift.Dv - L v - f|, with L evaluated by
// radial quadrature on the interpolated v (second differences below one spacing).
double generator_residual(const LevyModel& model, const ResolventSolution& solution, const std::vector<Field>& f,
                          const std::function<Vec(const Vec&)>& drift, int margin);

struct SchauderCheck {
    std::vector<double> k_norms;
    std::vector<double> ratios;
    double spread = 1.0;
    double f_holder_norm = 0.0;
    bool pass = false;
    nlohmann::json to_json() const;
};

// S(k) = (lambda^{theta/alpha} ||Dv||_0 + [Dv]_theta) / ||f||_beta for each k; pass iff spread <= 2.
SchauderCheck verify_schauder_k_independence(const LevyModel& model, const Field& f, double lambda,
                                             const std::vector<Vec>& k_list, const ResolventOptions& options = {});

}  // namespace levyflow
