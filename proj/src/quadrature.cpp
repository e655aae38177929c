#include "levyflow/quadrature.hpp"

#include "levyflow/core.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

namespace levyflow {

namespace {

constexpr int kDyadicLevels = 60;
constexpr long kMaxSubpanels = 4000000;

template <int N>
GaussRule make_rule() {
    using G = boost::math::quadrature::gauss<double, N>;
    GaussRule rule;
    const auto& x = G::abscissa();
    const auto& w = G::weights();
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0) {
            rule.nodes.push_back(0.0);
            rule.weights.push_back(w[i]);
        } else {
            rule.nodes.push_back(-x[i]);
            rule.weights.push_back(w[i]);
            rule.nodes.push_back(x[i]);
            rule.weights.push_back(w[i]);
        }
    }
    return rule;
}

}  // namespace

double radial_floor(double hi) { return std::ldexp(hi, -kDyadicLevels); }

QuadratureResult integrate_radial(const std::function<double(double)>& f, double lo, double hi,
                                  double freq) {
    QuadratureResult out;
    if (!(hi > lo)) return out;
    std::vector<double> edges;
    double a = lo > 0.0 ? lo : radial_floor(hi);
    edges.push_back(a);
    while (a * 2.0 < hi) {
        a *= 2.0;
        edges.push_back(a);
    }
    edges.push_back(hi);
    const double max_len = freq > 0.0 ? std::numbers::pi / freq : 0.0;
    long subpanels = 0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const double p0 = edges[i];
        const double p1 = edges[i + 1];
        long n_sub = 1;
        if (max_len > 0.0) n_sub = std::max<long>(1, static_cast<long>(std::ceil((p1 - p0) / max_len)));
        subpanels += n_sub;
        if (subpanels > kMaxSubpanels)
            throw ConvergenceError("radial quadrature exceeded its panel budget", out.error);
        const double w = (p1 - p0) / static_cast<double>(n_sub);
        for (long j = 0; j < n_sub; ++j) {
            const double s0 = p0 + w * static_cast<double>(j);
            const double s1 = (j + 1 == n_sub) ? p1 : s0 + w;
            double err = 0.0;
            out.value += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, s0, s1, 6, 1e-12, &err);
            out.error += err;
        }
    }
    return out;
}

const GaussRule& gauss_legendre(int n) {
    static const GaussRule r1{{0.0}, {2.0}};
    static const GaussRule r2 = make_rule<2>();
    static const GaussRule r3 = make_rule<3>();
    static const GaussRule r4 = make_rule<4>();
    static const GaussRule r8 = make_rule<8>();
    static const GaussRule r16 = make_rule<16>();
    switch (n) {
        case 1: return r1;
        case 2: return r2;
        case 3: return r3;
        case 4: return r4;
        case 8: return r8;
        case 16: return r16;
        default: throw DomainError("unsupported Gauss-Legendre order");
    }
}

}  // namespace levyflow
