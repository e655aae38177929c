#include "levyflow/drift.hpp"

#include <cmath>

namespace levyflow {

std::string to_string(DriftFamily f) {
    switch (f) {
        case DriftFamily::HolderPower: return "HolderPower";
        case DriftFamily::SmoothBump: return "SmoothBump";
        case DriftFamily::Constant: return "Constant";
        case DriftFamily::Custom: return "Custom";
    }
    return "?";
}

DriftFamily drift_family_from_string(const std::string& s) {
    if (s == "HolderPower") return DriftFamily::HolderPower;
    if (s == "SmoothBump") return DriftFamily::SmoothBump;
    if (s == "Constant") return DriftFamily::Constant;
    if (s == "Custom") return DriftFamily::Custom;
    throw DomainError("unknown drift family: " + s);
}

namespace {

void check_beta(double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("drift beta must lie in (0,1)");
}

void check_dim(int d) {
    if (d < 1 || d > kMaxDim) throw DomainError("drift dimension must be in 1..3");
}

}  // namespace

DriftSpec DriftSpec::holder_power(int d, double beta, double kappa, double bound) {
    check_dim(d);
    check_beta(beta);
    if (!(kappa >= 0.0) || !(bound > 0.0) || !std::isfinite(bound)) throw DomainError("HolderPower needs kappa >= 0 and a finite bound > 0");
    DriftSpec b;
    b.family_ = DriftFamily::HolderPower;
    b.dim_ = d;
    b.beta_ = beta;
    b.kappa_ = kappa;
    b.bound_ = bound;
    return b;
}

DriftSpec DriftSpec::smooth_bump(int d, double beta, double kappa, double width, Vec direction) {
    check_dim(d);
    check_beta(beta);
    if (!(width > 0.0)) throw DomainError("SmoothBump width must be positive");
    if (direction.size() == 0) direction = unit_vec(d, 0);
    if (direction.size() != d || !(direction.norm() > 0.0)) throw DomainError("SmoothBump direction is invalid");
    DriftSpec b;
    b.family_ = DriftFamily::SmoothBump;
    b.dim_ = d;
    b.beta_ = beta;
    b.kappa_ = kappa;
    b.width_ = width;
    b.direction_ = direction / direction.norm();
    b.bound_ = std::abs(kappa);
    return b;
}

DriftSpec DriftSpec::constant(const Vec& k, double beta) {
    check_dim(static_cast<int>(k.size()));
    check_beta(beta);
    DriftSpec b;
    b.family_ = DriftFamily::Constant;
    b.dim_ = static_cast<int>(k.size());
    b.beta_ = beta;
    b.direction_ = k;
    b.bound_ = k.norm();
    return b;
}

DriftSpec DriftSpec::custom(int d, double beta, double bound, double seminorm, std::function<Vec(const Vec&)> fn,
                            std::string name) {
    check_dim(d);
    check_beta(beta);
    if (!fn) throw DomainError("custom drift needs a function");
    DriftSpec b;
    b.family_ = DriftFamily::Custom;
    b.dim_ = d;
    b.beta_ = beta;
    b.bound_ = bound;
    b.seminorm_ = seminorm;
    b.fn_ = std::move(fn);
    b.name_ = std::move(name);
    return b;
}

Vec DriftSpec::operator()(const Vec& x) const {
    switch (family_) {
        case DriftFamily::HolderPower: {
            const double r = x.norm();
            if (r == 0.0) return zero_vec(dim_);
            return x * (std::min(kappa_ * std::pow(r, beta_), bound_) / r);
        }
        case DriftFamily::SmoothBump:
            return direction_ * (kappa_ * std::exp(-x.squaredNorm() / (width_ * width_)));
        case DriftFamily::Constant:
            return direction_;
        case DriftFamily::Custom:
            return fn_(x);
    }
    return zero_vec(dim_);
}

double DriftSpec::sup_norm() const { return bound_; }

double DriftSpec::holder_seminorm() const {
    switch (family_) {
        case DriftFamily::HolderPower:
            return std::pow(2.0, 1.0 - beta_) * kappa_;
        case DriftFamily::SmoothBump: {
            const double k = std::abs(kappa_);
            const double lip = k * std::sqrt(2.0 / std::exp(1.0)) / width_;
            return std::pow(k, 1.0 - beta_) * std::pow(lip, beta_);
        }
        case DriftFamily::Constant:
            return 0.0;
        case DriftFamily::Custom:
            return seminorm_;
    }
    return 0.0;
}

bool DriftSpec::is_zero() const {
    if (family_ == DriftFamily::Constant) return direction_.norm() == 0.0;
    if (family_ == DriftFamily::Custom) return false;
    return kappa_ == 0.0;
}

nlohmann::json DriftSpec::to_json() const {
    nlohmann::json j{{"family", to_string(family_)}, {"dimension", dim_}, {"beta", beta_}};
    switch (family_) {
        case DriftFamily::HolderPower:
            j["kappa"] = kappa_;
            j["bound"] = bound_;
            break;
        case DriftFamily::SmoothBump:
            j["kappa"] = kappa_;
            j["width"] = width_;
            j["direction"] = to_std(direction_);
            break;
        case DriftFamily::Constant:
            j["value"] = to_std(direction_);
            break;
        case DriftFamily::Custom:
            j["name"] = name_;
            j["bound"] = bound_;
            j["seminorm"] = seminorm_;
            break;
    }
    return j;
}

DriftSpec DriftSpec::from_json(const nlohmann::json& j) {
    const DriftFamily f = drift_family_from_string(j.at("family").get<std::string>());
    const int d = j.value("dimension", 1);
    const double beta = j.value("beta", 0.5);
    switch (f) {
        case DriftFamily::HolderPower:
            return holder_power(d, beta, j.value("kappa", 1.0), j.value("bound", 1.0));
        case DriftFamily::SmoothBump: {
            Vec dir;
            if (j.contains("direction")) dir = from_std(j["direction"].get<std::vector<double>>());
            return smooth_bump(d, beta, j.value("kappa", 1.0), j.value("width", 1.0), dir);
        }
        case DriftFamily::Constant: {
            const Vec k = j.contains("value") ? from_std(j["value"].get<std::vector<double>>()) : zero_vec(d);
            return constant(k, beta);
        }
        case DriftFamily::Custom:
            break;
    }
    throw DomainError("custom drifts cannot be rebuilt from a config");
}

}  // namespace levyflow
