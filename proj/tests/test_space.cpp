#include "support.hpp"

#include "hmvi/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace hmvi;

TEST_CASE("inner product")
{
    CHECK(inner({1, 0}, {0, 1}) == 0.0);
    CHECK(inner({2, 3}, {2, 3}) == 13.0);
    // hand dot product: 4 + 10 + 18
    const double expected = 1.0 * 4.0 + 2.0 * 5.0 + 3.0 * 6.0;
    CHECK(inner({1, 2, 3}, {4, 5, 6}) == expected);
    CHECK_THROWS_AS(inner({1, 2}, {1, 2, 3}), InputError);
}

TEST_CASE("norm")
{
    CHECK(norm({0, 0, 0}) == 0.0);
    CHECK(norm({3, 4}) == 5.0);
    CHECK(norm({1, 1, 1, 1}) == 2.0);
}

TEST_CASE("combine")
{
    CHECK(combine(1, {1, 2}, 0, {9, 9}) == Vector{1, 2});
    CHECK(combine(0.5, {2, 0}, 0.5, {0, 2}) == Vector{1, 1});
    const Vector a{1, 1}, b{1, 0};
    const Vector out = combine(2, a, -1, b);
    for (Index i = 0; i < 2; ++i) CHECK(out[i] == 2 * a[i] - b[i]);
    CHECK(out == Vector{1, 2});
    CHECK_THROWS_AS(combine(1, {1}, 1, {1, 2}), InputError);
}

TEST_CASE("vectors reject empty and non-finite entries")
{
    CHECK_THROWS_AS(Vector(Eigen::VectorXd()), InputError);
    CHECK_THROWS_AS(Vector({1.0, std::numeric_limits<double>::quiet_NaN()}), InputError);
    CHECK_THROWS_AS(Vector({std::numeric_limits<double>::infinity()}), InputError);
    const Vector v{1, 2, 3};
    CHECK(v.dim() == 3);
    CHECK(v.entries().size() == 3);
}

TEST_CASE("inner product space properties")
{
    testing::Gen gen(11);
    for (int trial = 0; trial < 500; ++trial) {
        const Index n = gen.dim(1, 40);
        const Vector a = gen.vector(n, gen.uniform(0.1, 10));
        const Vector b = gen.vector(n, gen.uniform(0.1, 10));

        CHECK(std::abs(inner(a, b)) <= norm(a) * norm(b) * (1 + 1e-14));
        CHECK(norm(combine(1, a, 1, b)) <= (norm(a) + norm(b)) * (1 + 1e-14));
        CHECK(inner(a, b) == doctest::Approx(inner(b, a)).epsilon(1e-15));

        const double plus = norm(combine(1, a, 1, b));
        const double minus = norm(combine(1, a, -1, b));
        const double lhs = plus * plus + minus * minus;
        const double rhs = 2 * (inner(a, a) + inner(b, b));
        CHECK(std::abs(lhs - rhs) <= 1e-12 * rhs);

        const double alpha = gen.normal();
        const Vector c = gen.vector(n);
        CHECK(std::abs(inner(combine(alpha, a, 1, c), b) - (alpha * inner(a, b) + inner(c, b))) <=
              1e-12 * (std::abs(alpha) * norm(a) + norm(c)) * norm(b));
    }
}
