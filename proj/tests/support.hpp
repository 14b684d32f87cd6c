#pragma once

#include "hmvi/space.hpp"

#include <random>

namespace hmvi::testing {

// Small seeded generators for property tests.
class Gen
{
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double normal(double sd = 1.0) { return std::normal_distribution<double>(0.0, sd)(rng_); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    Index dim(Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(rng_); }

    Vector vector(Index dim, double sd = 1.0)
    {
        Eigen::VectorXd v(dim);
        for (Index i = 0; i < dim; ++i) v[i] = normal(sd);
        return Vector(v);
    }

private:
    std::mt19937_64 rng_;
};

} // namespace hmvi::testing
