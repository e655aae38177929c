#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace levyflow {

inline constexpr int kMaxDim = 3;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

inline Vec zero_vec(int d) { return Vec::Zero(d); }
inline Mat identity_mat(int d) { return Mat::Identity(d, d); }

inline Vec unit_vec(int d, int k) {
    Vec e = Vec::Zero(d);
    e[k] = 1.0;
    return e;
}

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid parameters or inputs outside an operation's precondition.
class DomainError : public Error {
public:
    using Error::Error;
};

// An iterative or adaptive procedure failed to reach its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

// A configured work budget would be exceeded; carries a parameter that fits the budget.
class BudgetError : public Error {
public:
    BudgetError(const std::string& what, double suggestion)
        : Error(what), suggestion_(suggestion) {}
    double suggestion() const { return suggestion_; }

private:
    double suggestion_;
};

std::vector<double> to_std(const Vec& v);
Vec from_std(const std::vector<double>& v);

}  // namespace levyflow
