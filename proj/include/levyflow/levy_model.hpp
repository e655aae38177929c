#pragma once

#include "levyflow/core.hpp"

#include <json.hpp>

#include <complex>
#include <string>
#include <vector>

namespace levyflow {

enum class ModelClass {
    IsotropicStable,
    AxisStable,
    TruncatedStable,
    TemperedStableSpecial,
    RelativisticStable,
    SphericalRadial,
};

std::string to_string(ModelClass c);
ModelClass model_class_from_string(const std::string& s);

// Strict rejects direction sets that do not span R^d; AllowDegenerate exists for diagnostics that
// must show how degenerate measures fail.
enum class MeasureCheck { Strict, AllowDegenerate };

struct Direction {
    Vec xi;
    double weight = 0.0;
};

// int_0^inf (1 - cos s) s^{-1-alpha} ds
double stable_constant(double alpha);
// E|<e_1, xi>|^alpha for xi uniform on the unit sphere of R^d
double sphere_projection_moment(double alpha, int d);
// Quasi-uniform antipodally symmetric direction set with total weight `mass`.
std::vector<Direction> quasi_uniform_sphere(int d, int n, double mass);

// Pure-jump Levy process described as radial profile x spherical measure:
// nu(dz) = sum_i w_i rho(s) ds delta_{xi_i}(dtheta), z = s theta.
class LevyModel {
public:
    static LevyModel isotropic_stable(int d, double alpha, double scale = 1.0);
    static LevyModel axis_stable(int d, double alpha, std::vector<double> scales);
    static LevyModel truncated_stable(int d, double alpha, std::vector<Direction> mu, double r = 1.0,
                                      double scale = 1.0, MeasureCheck check = MeasureCheck::Strict);
    static LevyModel tempered_stable(int d, double alpha, std::vector<Direction> mu, double scale = 1.0,
                                     MeasureCheck check = MeasureCheck::Strict);
    static LevyModel relativistic_stable(int d, double alpha, double mass, double scale = 1.0);
    static LevyModel spherical_radial(int d, double alpha, std::vector<Direction> mu, double scale = 1.0,
                                      MeasureCheck check = MeasureCheck::Strict);

    int dimension() const { return dim_; }
    ModelClass model_class() const { return cls_; }
    double alpha() const { return alpha_; }
    const std::vector<double>& scale() const { return scale_; }
    double truncation_radius() const { return radius_; }
    double mass() const { return mass_; }
    // Spherical measure as supplied (empty for classes defined through their symbol).
    const std::vector<Direction>& spherical_measure() const { return mu_; }
    int sphere_resolution() const { return sphere_resolution_; }
    bool degenerate() const { return degenerate_; }

    // Effective direction set of nu (scale and class constants folded into the weights);
    // a quasi-uniform discretisation when the spherical part is the uniform measure in d >= 2.
    const std::vector<Direction>& jump_directions() const { return directions_; }
    bool uniform_sphere() const { return uniform_sphere_; }
    double sphere_mass() const { return sphere_mass_; }
    bool symmetric() const { return symmetric_; }
    bool stable_class() const;
    // Self-similar classes whose increments can be drawn exactly.
    bool exact_sampling() const;

    double radial_density(double s) const;
    // Support bound R of the radial profile (infinity when unbounded).
    double radial_cutoff() const;
    // Radius beyond which the radial profile is numerically zero.
    double radial_extent() const;
    // int_s^R rho
    double radial_tail(double s) const;
    // int_lo^hi t^p rho(t) dt; lo = 0 requires p > alpha.
    double radial_moment(double p, double lo, double hi) const;

    std::complex<double> symbol(const Vec& u) const;
    double symbol_real(const Vec& u) const;

    nlohmann::json to_json() const;
    static LevyModel from_json(const nlohmann::json& j);

private:
    LevyModel() = default;
    void finalize();
    double radial_integral_cos(double a) const;
    double radial_integral_sin(double a) const;

    int dim_ = 1;
    ModelClass cls_ = ModelClass::IsotropicStable;
    double alpha_ = 1.0;
    std::vector<double> scale_{1.0};
    double radius_ = 1.0;
    double mass_ = 1.0;
    std::vector<Direction> mu_;
    int sphere_resolution_ = 0;

    std::vector<Direction> directions_;
    bool uniform_sphere_ = false;
    double sphere_mass_ = 0.0;
    bool symmetric_ = true;
    bool degenerate_ = false;
};

struct SectorBounds {
    double c1 = 0.0;
    double c2 = 0.0;
    bool pass = false;
};
SectorBounds check_sector_bounds(const LevyModel& model, double M, int n_probes);

// int_{|z|<=1} |z|^sigma nu(dz); +infinity when sigma <= alpha.
double small_jump_moment(const LevyModel& model, double sigma);

struct DominationResult {
    bool applicable = false;
    bool pass = false;
    double margin = 0.0;
    double reference_scale = 0.0;
    double reference_radius = 0.0;
};
DominationResult dominates_truncated(const LevyModel& model);

}  // namespace levyflow
