#pragma once

#include "hmvi/schemes.hpp"

#include <cstdint>

namespace hmvi {

/// Problem generators with analytically known solutions and exact constants.

/// H = M = identity, A(u) = u - b in one dimension; x* = b / 2.
ProblemInstance gen_scalar_affine(double b, double lambda);

struct SpdLinearParams
{
    Index dim = 50;
    double eigen_min = 1.0;
    double eigen_max = 4.0;
    /// A = a_scale * H - b_A
    double a_scale = 1.0;
    /// M = m * identity
    double m = 1.0;
    double lambda = 1.0;
    /// Standard deviation of the entries of b_A.
    double b_scale = 1.0;
    std::uint64_t seed = 0;
    /// Skip the random rotation: H is diagonal with the chosen spectrum.
    bool diagonal = false;
};

/// H = Q diag(d) Q^T with d evenly spread over [eigen_min, eigen_max] and Q a
/// seeded random orthogonal matrix; A = a_scale H - b_A; M = m I.
/// gamma = eigen_min, tau = eigen_max, r = a_scale gamma^2, s = a_scale tau, eta = m.
ProblemInstance gen_spd_linear(const SpdLinearParams& params);

/// Convenience overload for the common arguments.
ProblemInstance gen_spd_linear(Index dim, double eigen_min, double eigen_max, std::uint64_t seed,
                               double lambda = 1.0);

/// gen_spd_linear without the rotation.
ProblemInstance gen_diagonal_linear(SpdLinearParams params);

/// H = identity, A(u) = u - b, M(u) = c u + d||u||_1 with
/// x*_i = softthreshold(b_i, 1) / (1 + c).
ProblemInstance gen_soft_threshold(const Vector& b, double c, double lambda);

/// Seeded variant: b_i ~ N(0, b_scale^2).
ProblemInstance gen_soft_threshold(Index dim, double c, double lambda, std::uint64_t seed, double b_scale = 2.0);

double soft_threshold(double value, double threshold);

} // namespace hmvi
