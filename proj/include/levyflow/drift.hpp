#pragma once

#include "levyflow/core.hpp"

#include <json.hpp>

#include <functional>
#include <string>

namespace levyflow {

enum class DriftFamily { HolderPower, SmoothBump, Constant, Custom };

std::string to_string(DriftFamily f);
DriftFamily drift_family_from_string(const std::string& s);

// Bounded beta-Holder drift b: R^d -> R^d.
//   HolderPower: b(x) = min(kappa |x|^beta, bound) x/|x|   (odd, Holder exactly at 0)
//   SmoothBump:  b(x) = kappa exp(-|x|^2/w^2) e            (smooth, any beta)
//   Constant:    b(x) = k
//   Custom:      caller-supplied map with caller-supplied bound and seminorm
class DriftSpec {
public:
    static DriftSpec holder_power(int d, double beta, double kappa = 1.0, double bound = 1.0);
    static DriftSpec smooth_bump(int d, double beta, double kappa = 1.0, double width = 1.0, Vec direction = Vec());
    static DriftSpec constant(const Vec& k, double beta = 0.5);
    static DriftSpec zero(int d, double beta = 0.5) { return constant(zero_vec(d), beta); }
    static DriftSpec custom(int d, double beta, double bound, double seminorm, std::function<Vec(const Vec&)> fn,
                            std::string name = "custom");

    DriftFamily family() const { return family_; }
    int dimension() const { return dim_; }
    double beta() const { return beta_; }
    double kappa() const { return kappa_; }
    double width() const { return width_; }
    const Vec& direction() const { return direction_; }

    Vec operator()(const Vec& x) const;
    // ||b||_0 (exact for the shipped families).
    double sup_norm() const;
    // [b]_beta: 2^{1-beta} kappa for HolderPower, kappa^{1-beta} L^beta for SmoothBump.
    double holder_seminorm() const;
    bool is_zero() const;

    nlohmann::json to_json() const;
    static DriftSpec from_json(const nlohmann::json& j);

private:
    DriftSpec() = default;

    DriftFamily family_ = DriftFamily::Constant;
    int dim_ = 1;
    double beta_ = 0.5;
    double kappa_ = 0.0;
    double bound_ = 0.0;
    double width_ = 1.0;
    Vec direction_;
    double seminorm_ = 0.0;
    std::string name_;
    std::function<Vec(const Vec&)> fn_;
};

}  // namespace levyflow
