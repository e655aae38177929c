#include "levyflow/rng.hpp"

#include <cmath>

namespace levyflow {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
    return splitmix64(splitmix64(root) ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
}

RandomStream::RandomStream(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

double RandomStream::uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() { return normal_(engine_); }

double RandomStream::exponential() { return -std::log(uniform()); }

std::int64_t RandomStream::poisson(double mean) {
    if (mean <= 0.0) return 0;
    std::poisson_distribution<std::int64_t> dist(mean);
    return dist(engine_);
}

Vec RandomStream::normal_vec(int d) {
    Vec v(d);
    for (int k = 0; k < d; ++k) v[k] = normal();
    return v;
}

Vec RandomStream::direction(int d) {
    if (d == 1) return Vec::Constant(1, uniform() < 0.5 ? -1.0 : 1.0);
    for (;;) {
        Vec g = normal_vec(d);
        const double n = g.norm();
        if (n > 1e-300) return g / n;
    }
}

}  // namespace levyflow
