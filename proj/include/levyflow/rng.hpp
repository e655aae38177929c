#pragma once

#include "levyflow/core.hpp"

#include <cstdint>
#include <random>

namespace levyflow {

std::uint64_t splitmix64(std::uint64_t x);

// Child seed for task `index` of a run rooted at `root`:
// splitmix64(splitmix64(root) ^ (golden * (index + 1))).
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index);

// Single-owner random stream. Children are derived from the seed, never from the state,
// so a child depends only on (seed, index).
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }
    RandomStream child(std::uint64_t index) const { return RandomStream(derive_seed(seed_, index)); }

    std::uint64_t bits() { return engine_(); }
    // Uniform on the open interval (0,1).
    double uniform();
    double normal();
    double exponential();
    std::int64_t poisson(double mean);
    Vec normal_vec(int d);
    // Uniformly distributed direction on the unit sphere of R^d.
    Vec direction(int d);

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace levyflow
