#include "hmvi/problems.hpp"

#include "hmvi/errors.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace hmvi {

namespace {

Eigen::MatrixXd random_orthogonal(Index dim, std::mt19937_64& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd g(dim, dim);
    for (Index j = 0; j < dim; ++j) {
        for (Index i = 0; i < dim; ++i) g(i, j) = normal(rng);
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    // Fix column signs so the factor is unique for a given Gaussian draw.
    const Eigen::MatrixXd rm = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < dim; ++j) {
        if (rm(j, j) < 0.0) q.col(j) *= -1.0;
    }
    return q;
}

Eigen::VectorXd spread(Index dim, double lo, double hi)
{
    Eigen::VectorXd d(dim);
    if (dim == 1) {
        d[0] = lo;
        return d;
    }
    for (Index i = 0; i < dim; ++i) {
        d[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(dim - 1);
    }
    d[dim - 1] = hi;
    return d;
}

} // namespace

double soft_threshold(double value, double threshold)
{
    if (value > threshold) return value - threshold;
    if (value < -threshold) return value + threshold;
    return 0.0;
}

ProblemInstance gen_scalar_affine(double b, double lambda)
{
    if (!std::isfinite(b)) throw InputError("gen_scalar_affine: b must be finite");
    auto H = SingleValuedOperator::scaled_identity(1, 1.0);
    auto A = SingleValuedOperator::affine(Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Constant(1, b));
    auto M = MultiValuedOperator::scaled_identity(1, 1.0);
    return ProblemInstance(std::move(H), std::move(A), std::move(M), OperatorConstants::make(1, 1, 1, 1, 1), lambda,
                           Vector{b / 2.0}, {}, "scalar-affine: 0 = (x - b) + x");
}

ProblemInstance gen_spd_linear(const SpdLinearParams& params)
{
    if (params.dim < 1) throw InputError("gen_spd_linear: dim must be positive");
    if (!(params.eigen_min > 0.0 && params.eigen_max >= params.eigen_min && std::isfinite(params.eigen_max))) {
        throw InputError("gen_spd_linear: need 0 < eigen_min <= eigen_max");
    }
    if (!(params.a_scale > 0.0) || !(params.m > 0.0)) {
        throw InputError("gen_spd_linear: a_scale and m must be positive");
    }
    const Index n = params.dim;
    std::mt19937_64 rng(params.seed);

    const Eigen::VectorXd d = spread(n, params.eigen_min, params.eigen_max);
    Eigen::MatrixXd h;
    if (params.diagonal) {
        h = d.asDiagonal();
    } else {
        const Eigen::MatrixXd q = random_orthogonal(n, rng);
        h = q * d.asDiagonal() * q.transpose();
        h = 0.5 * (h + h.transpose()).eval();
    }

    std::normal_distribution<double> normal(0.0, params.b_scale);
    Eigen::VectorXd b(n);
    for (Index i = 0; i < n; ++i) b[i] = normal(rng);

    // A(x) + M(x) = a H x - b + m x = 0
    const Eigen::MatrixXd system = params.a_scale * h + params.m * Eigen::MatrixXd::Identity(n, n);
    const Eigen::VectorXd solution = system.llt().solve(b);

    const double gamma = params.eigen_min;
    const double tau = params.eigen_max;
    // <a H d, H d> = a ||H d||^2 >= a gamma^2 ||d||^2 and ||a H d|| <= a tau ||d||.
    const auto constants =
        OperatorConstants::make(gamma, tau, params.a_scale * gamma * gamma, params.a_scale * tau, params.m);

    std::ostringstream notes;
    notes << (params.diagonal ? "diagonal-linear" : "spd-linear") << ": H spectrum [" << gamma << ", " << tau
          << "], A = " << params.a_scale << " H - b, M = " << params.m << " I; r = a_scale * gamma^2 = "
          << constants.r << ", s = a_scale * tau = " << constants.s;

    Eigen::MatrixXd a_matrix = params.a_scale * h;
    return ProblemInstance(SingleValuedOperator::affine(std::move(h)),
                           SingleValuedOperator::affine(std::move(a_matrix), std::move(b)),
                           MultiValuedOperator::scaled_identity(n, params.m), constants, params.lambda,
                           Vector(solution), {}, notes.str());
}

ProblemInstance gen_spd_linear(Index dim, double eigen_min, double eigen_max, std::uint64_t seed, double lambda)
{
    SpdLinearParams params;
    params.dim = dim;
    params.eigen_min = eigen_min;
    params.eigen_max = eigen_max;
    params.seed = seed;
    params.lambda = lambda;
    return gen_spd_linear(params);
}

ProblemInstance gen_diagonal_linear(SpdLinearParams params)
{
    params.diagonal = true;
    return gen_spd_linear(params);
}

ProblemInstance gen_soft_threshold(const Vector& b, double c, double lambda)
{
    if (!(c > 0.0)) throw InputError("gen_soft_threshold: c must be positive");
    const Index n = b.dim();
    Eigen::VectorXd solution(n);
    for (Index i = 0; i < n; ++i) solution[i] = soft_threshold(b[i], 1.0) / (1.0 + c);

    std::ostringstream notes;
    notes << "soft-threshold: 0 in (x - b) + " << c << " x + d||x||_1";
    return ProblemInstance(SingleValuedOperator::scaled_identity(n, 1.0),
                           SingleValuedOperator::affine(Eigen::MatrixXd::Identity(n, n), b.values()),
                           MultiValuedOperator::shifted_subdifferential(n, c), OperatorConstants::make(1, 1, 1, 1, c),
                           lambda, Vector(solution), {}, notes.str());
}

ProblemInstance gen_soft_threshold(Index dim, double c, double lambda, std::uint64_t seed, double b_scale)
{
    if (dim < 1) throw InputError("gen_soft_threshold: dim must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, b_scale);
    Eigen::VectorXd b(dim);
    for (Index i = 0; i < dim; ++i) b[i] = normal(rng);
    return gen_soft_threshold(Vector(b), c, lambda);
}

} // namespace hmvi
