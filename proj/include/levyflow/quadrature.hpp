#pragma once

#include <functional>
#include <vector>

namespace levyflow {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
};

// Integral of f over [lo, hi] (0 <= lo < hi < inf) on a geometric mesh with ratio 2 (dyadic
// grading toward lo, or toward 0 down to hi*2^-60 when lo = 0), each dyadic panel split into
// subpanels no longer than pi/freq, Gauss-Kronrod 15 per subpanel.
QuadratureResult integrate_radial(const std::function<double(double)>& f, double lo, double hi,
                                  double freq = 0.0);

// Smallest radius the lo = 0 mesh reaches; callers add the analytic remainder below it.
double radial_floor(double hi);

// Gauss-Legendre rule on [-1, 1]; n in {1, 2, 3, 4, 8, 16}.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussRule& gauss_legendre(int n);

}  // namespace levyflow
