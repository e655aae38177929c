#pragma once

#include <functional>
#include <vector>

namespace levyflow {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& x);
double median(std::vector<double> x);
double quantile(std::vector<double> x, double q);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};
LineFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y);

// Kolmogorov-Smirnov distances.
double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf);
double ks_distance_two_sample(std::vector<double> a, std::vector<double> b);
// Asymptotic critical value of the two-sample statistic at level 0.01.
double ks_two_sample_critical_001(std::size_t n, std::size_t m);

double chi_squared_quantile(double dof, double p);

}  // namespace levyflow
