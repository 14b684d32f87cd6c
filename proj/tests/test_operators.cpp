#include "support.hpp"

#include "hmvi/errors.hpp"
#include "hmvi/operators.hpp"
#include "hmvi/problems.hpp"

#include <doctest.h>

#include <cmath>

using namespace hmvi;

TEST_CASE("apply")
{
    CHECK(SingleValuedOperator::scaled_identity(2, 2).apply(Vector{1, 3}) == Vector{2, 6});

    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
    const Eigen::VectorXd b = Eigen::VectorXd::Ones(2);
    // apply(x) = Ix - b at the origin
    CHECK(SingleValuedOperator::affine(I, b).apply(Vector{0, 0}) == Vector{-1, -1});

    CHECK(SingleValuedOperator::diagonal_nonlinear(1, 1, 1).apply(Vector{0}) == Vector{0});
    const auto f = SingleValuedOperator::diagonal_nonlinear(1, 1, 1);
    CHECK(f.apply(Vector{0.7})[0] == doctest::Approx(0.7 + std::tanh(0.7)).epsilon(1e-15));

    CHECK_THROWS_AS(SingleValuedOperator::scaled_identity(2, 1).apply(Vector{1}), InputError);
}

TEST_CASE("multivalued selections")
{
    const auto M = MultiValuedOperator::shifted_subdifferential(3, 2);
    const Vector sel = M.selection(Vector{-1, 0, 2});
    CHECK(sel == Vector{-3, 0, 5});
    CHECK_FALSE(M.is_single_valued());
    CHECK(MultiValuedOperator::scaled_identity(2, 3).selection(Vector{1, -1}) == Vector{3, -3});
}

TEST_CASE("constants invariants")
{
    CHECK_NOTHROW(OperatorConstants::make(1, 1, 1, 1, 1));
    CHECK_THROWS_AS(OperatorConstants::make(0, 1, 1, 1, 1), ConstantsError);
    CHECK_THROWS_AS(OperatorConstants::make(1, 1, 1, 1, -1), ConstantsError);
    CHECK_THROWS_AS(OperatorConstants::make(2, 1, 1, 1, 1), ConstantsError); // gamma > tau
    CHECK_THROWS_AS(OperatorConstants::make(1, 1, 3, 2, 1), ConstantsError); // r > s tau
    CHECK_NOTHROW(OperatorConstants::make(1, 2, 4, 2, 1));                   // r = s tau
}

TEST_CASE("validate_constants examples")
{
    const auto I = SingleValuedOperator::scaled_identity(3, 1);
    const auto M = MultiValuedOperator::scaled_identity(3, 1);

    auto report = validate_constants(I, I, M, OperatorConstants{1, 1, 1, 1, 1}, 200, 1);
    CHECK(report.ok());
    CHECK(report.samples == 200);

    report = validate_constants(I, I, M, OperatorConstants{1, 0.5, 0.5, 1, 1}, 200, 1);
    CHECK(report.count("H-lipschitz") == 200);
    REQUIRE_FALSE(report.violations.empty());
    const auto& v = report.violations.front();
    CHECK(v.lhs > v.rhs);
    CHECK(v.x.dim() == 3);

    // <2(x-y), x-y> = 2|x-y|^2 exactly
    const auto A2 = SingleValuedOperator::scaled_identity(3, 2);
    CHECK(validate_constants(I, A2, M, OperatorConstants{1, 1, 2, 2, 1}, 200, 2).ok());
}

TEST_CASE("catalog constants")
{
    const auto h = catalog_constants(SingleValuedOperator::scaled_identity(4, 1));
    CHECK(h.strong_monotonicity == 1.0);
    CHECK(h.lipschitz == 1.0);

    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
    D(0, 0) = 1;
    D(1, 1) = 4;
    const auto d = catalog_constants(SingleValuedOperator::affine(D));
    CHECK(d.strong_monotonicity == doctest::Approx(D.diagonal().minCoeff()));
    CHECK(d.lipschitz == doctest::Approx(D.diagonal().maxCoeff()));

    CHECK(catalog_constants(MultiValuedOperator::scaled_identity(3, 3)) == 3.0);

    // A = c H for scaled identities: r = c h^2, s = c h
    const auto H = SingleValuedOperator::scaled_identity(2, 2);
    const auto A = SingleValuedOperator::scaled_identity(2, 3);
    const auto c = catalog_constants(H, A, MultiValuedOperator::scaled_identity(2, 1));
    CHECK(c.r == doctest::Approx(3.0 * 2.0 * 2.0 / 2.0)); // <3d, 2d> = 6|d|^2
    CHECK(c.s == doctest::Approx(3.0));
    CHECK(c.gamma == 2.0);
    CHECK(c.eta == 1.0);
}

TEST_CASE("catalog operators satisfy their own constants")
{
    testing::Gen gen(5);
    for (int trial = 0; trial < 12; ++trial) {
        const Index n = gen.dim(1, 100);
        const double h = gen.uniform(0.5, 3), a = gen.uniform(0.5, 3), m = gen.uniform(0.1, 2);
        const auto H = SingleValuedOperator::scaled_identity(n, h);
        const auto A = SingleValuedOperator::scaled_identity(n, a);
        const auto M = trial % 2 ? MultiValuedOperator::scaled_identity(n, m)
                                 : MultiValuedOperator::shifted_subdifferential(n, m);
        const auto c = catalog_constants(H, A, M);
        const auto report = validate_constants(H, A, M, c, 1000, 100 + trial);
        CHECK_MESSAGE(report.ok(), "dim " << n << " trial " << trial);
    }

    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        SpdLinearParams params;
        params.dim = 1 + static_cast<Index>(seed) * 30;
        params.eigen_min = 0.5;
        params.eigen_max = 3;
        params.seed = seed;
        const auto p = gen_spd_linear(params);
        const auto c = catalog_constants(p.H(), p.A(), p.M());
        CHECK(validate_constants(p.H(), p.A(), p.M(), c, 1000, seed).ok());
    }

    const auto Hn = SingleValuedOperator::diagonal_nonlinear(20, 1.5, 0.8);
    const auto An = SingleValuedOperator::diagonal_nonlinear(20, 2.0, -0.5);
    const auto Mn = MultiValuedOperator::scaled_identity(20, 1);
    const auto cn = catalog_constants(Hn, An, Mn);
    CHECK(validate_constants(Hn, An, Mn, cn, 1000, 9).ok());
}

TEST_CASE("tightening a constant is detected")
{
    // Scaled identities attain every bound for every pair, so a 1e-3 tightening
    // in the binding direction must produce violations.
    const auto H = SingleValuedOperator::scaled_identity(1, 2);
    const auto A = SingleValuedOperator::scaled_identity(1, 3);
    const auto M = MultiValuedOperator::scaled_identity(1, 1.5);
    const auto c = catalog_constants(H, A, M);
    const double f = 1 + 1e-3;

    auto tight = c;
    tight.tau = c.tau / f;
    tight.gamma = std::min(c.gamma, tight.tau);
    CHECK(validate_constants(H, A, M, tight, 1000, 1).count("H-lipschitz") > 0);

    tight = c;
    tight.gamma = c.gamma * f;
    tight.tau = c.tau * f;
    CHECK(validate_constants(H, A, M, tight, 1000, 1).count("H-strong-monotonicity") > 0);

    tight = c;
    tight.s = c.s / f;
    tight.r = std::min(c.r, tight.s * tight.tau);
    CHECK(validate_constants(H, A, M, tight, 1000, 1).count("A-lipschitz") > 0);

    tight = c;
    tight.r = c.r * f;
    tight.s = c.s * f;
    CHECK(validate_constants(H, A, M, tight, 1000, 1).count("A-strong-monotonicity-wrt-H") > 0);

    tight = c;
    tight.eta = c.eta * f;
    CHECK(validate_constants(H, A, M, tight, 1000, 1).count("M-strong-monotonicity") > 0);
}

TEST_CASE("non-catalog combinations are unsupported")
{
    Eigen::MatrixXd B(2, 2);
    B << 2, 1, 0, 2;
    const auto H = SingleValuedOperator::diagonal_nonlinear(2, 1, 0.5);
    const auto A = SingleValuedOperator::affine(B);
    CHECK_THROWS_AS(catalog_constants(H, A, MultiValuedOperator::scaled_identity(2, 1)), UnsupportedOperator);
}
