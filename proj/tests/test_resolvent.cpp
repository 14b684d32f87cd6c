#include "support.hpp"

#include "hmvi/errors.hpp"
#include "hmvi/problems.hpp"
#include "hmvi/resolvent.hpp"

#include <doctest.h>

#include <cmath>

using namespace hmvi;

namespace {

Eigen::MatrixXd diag(std::initializer_list<double> d)
{
    Eigen::VectorXd v(static_cast<Index>(d.size()));
    Index i = 0;
    for (double x : d) v[i++] = x;
    return v.asDiagonal();
}

} // namespace

TEST_CASE("resolve examples")
{
    const ResolventEngine id(SingleValuedOperator::scaled_identity(2, 1), MultiValuedOperator::scaled_identity(2, 1), 1);
    CHECK(id.strategy() == ResolventStrategy::closed_form_linear);
    CHECK(id.resolve(Vector{2, 4}) == Vector{1, 2});

    // (1 + lambda c) x + lambda d|x| contains u: x = soft(u, lambda) / (1 + lambda c)
    const ResolventEngine soft(SingleValuedOperator::scaled_identity(1, 1),
                               MultiValuedOperator::shifted_subdifferential(1, 1), 1);
    CHECK(soft.strategy() == ResolventStrategy::separable_scalar);
    const double x = soft.resolve(Vector{3})[0];
    CHECK(x == doctest::Approx(1.0));
    CHECK(x + 1.0 * (1.0 * x + 1.0) == doctest::Approx(3.0));

    const ResolventEngine d(SingleValuedOperator::affine(diag({1, 4})), MultiValuedOperator::scaled_identity(2, 1), 2);
    const Vector y = d.resolve(Vector{3, 6});
    CHECK(y[0] == doctest::Approx(3.0 / (1 + 2)));
    CHECK(y[1] == doctest::Approx(6.0 / (4 + 2)));

    CHECK_THROWS_AS(ResolventEngine(SingleValuedOperator::scaled_identity(1, 1),
                                    MultiValuedOperator::scaled_identity(1, 1), 0),
                    InputError);
}

TEST_CASE("lipschitz bound")
{
    CHECK(resolvent_lipschitz_bound(OperatorConstants{1, 1, 1, 1, 1}, 1) == 0.5);
    CHECK(resolvent_lipschitz_bound(OperatorConstants{1, 1, 1, 1, 1}, 1e-12) == doctest::Approx(1.0));
    CHECK(resolvent_lipschitz_bound(OperatorConstants{2, 2, 1, 1, 3}, 4) == doctest::Approx(1.0 / (2 + 4 * 3)));
    CHECK_THROWS_AS(resolvent_lipschitz_bound(OperatorConstants{1, 1, 1, 1, 1}, -1), InputError);
}

TEST_CASE("soft-threshold selection at zero")
{
    const ResolventEngine e(SingleValuedOperator::scaled_identity(3, 1),
                            MultiValuedOperator::shifted_subdifferential(3, 2), 0.5);
    const Eigen::Vector3d u(0.2, -0.4, 1.0);
    const Resolved r = e.solve(u);
    // the first two coordinates are absorbed by the subgradient
    CHECK(r.x[0] == 0.0);
    CHECK(r.x[1] == 0.0);
    CHECK(r.selection[0] == doctest::Approx(0.2 / 0.5));
    CHECK(r.selection[1] == doctest::Approx(-0.4 / 0.5));
    CHECK(r.x[2] == doctest::Approx((1.0 - 0.5) / (1 + 0.5 * 2)));
    CHECK(e.inclusion_residual(u, r) <= 1e-15);
}

TEST_CASE("inclusion residual and round trips")
{
    testing::Gen gen(3);
    struct Case
    {
        SingleValuedOperator H;
        MultiValuedOperator M;
        double lambda;
    };
    const auto p = gen_spd_linear(20, 1, 3, 4);
    std::vector<Case> cases{
        {SingleValuedOperator::scaled_identity(20, 2), MultiValuedOperator::scaled_identity(20, 1), 0.7},
        {p.H(), p.M(), 1.3},
        {p.H(), MultiValuedOperator::linear(p.H().linear_part()), 0.4},
        {SingleValuedOperator::diagonal_nonlinear(20, 1.5, 0.7), MultiValuedOperator::scaled_identity(20, 2), 0.9},
        {SingleValuedOperator::diagonal_nonlinear(20, 1.5, 0.7),
         MultiValuedOperator::shifted_subdifferential(20, 0.5), 0.9},
        {SingleValuedOperator::scaled_identity(20, 1), MultiValuedOperator::shifted_subdifferential(20, 1), 2.0},
    };
    for (const auto& c : cases) {
        const ResolventEngine e(c.H, c.M, c.lambda);
        INFO(to_string(e.strategy()));
        for (int trial = 0; trial < 50; ++trial) {
            const Eigen::VectorXd u = gen.vector(20, 3).values();
            const Resolved r = e.solve(u);
            const double tol = e.is_exact() ? 1e-10 * (1 + u.norm()) : e.inner_tolerance() * 10;
            CHECK(e.inclusion_residual(u, r) <= tol);
        }
        if (c.M.is_single_valued()) {
            for (int trial = 0; trial < 50; ++trial) {
                const Eigen::VectorXd x = gen.vector(20).values();
                const Eigen::VectorXd u = c.H.apply(x) + c.lambda * c.M.selection(x);
                CHECK((e.resolve(u) - x).norm() <= 1e-9 * (1 + x.norm()));
            }
        }
    }
}

TEST_CASE("forced newton strategy agrees with closed form")
{
    const auto p = gen_spd_linear(10, 1, 2, 7);
    ResolventOptions newton;
    newton.strategy = ResolventStrategy::newton_general;
    const ResolventEngine a(p.H(), p.M(), 0.8);
    const ResolventEngine b(p.H(), p.M(), 0.8, newton);
    testing::Gen gen(1);
    for (int k = 0; k < 20; ++k) {
        const Vector u = gen.vector(10, 5);
        CHECK(distance(a.resolve(u), b.resolve(u)) <= 1e-10);
    }
    ResolventOptions closed;
    closed.strategy = ResolventStrategy::closed_form_linear;
    CHECK_THROWS_AS(ResolventEngine(SingleValuedOperator::scaled_identity(2, 1),
                                    MultiValuedOperator::shifted_subdifferential(2, 1), 1, closed),
                    UnsupportedOperator);
}

TEST_CASE("newton iteration cap raises divergence")
{
    ResolventOptions opts;
    opts.strategy = ResolventStrategy::newton_general;
    opts.max_newton_iterations = 1;
    opts.inner_tolerance = 1e-300;
    const ResolventEngine e(SingleValuedOperator::diagonal_nonlinear(3, 1, 2), MultiValuedOperator::scaled_identity(3, 1),
                            1, opts);
    CHECK_THROWS_AS(e.resolve(Vector{5, -5, 3}), ResolventDivergence);
}

TEST_CASE("nonexpansiveness audit")
{
    const auto spd = gen_spd_linear(30, 1, 4, 2, 0.6);
    const auto a = audit_resolvent_lipschitz(spd.resolvent(), spd.constants(), 1000, 8, 2e-12);
    CHECK(a.violations == 0);
    CHECK(a.max_ratio <= a.bound * (1 + 1e-12));

    const auto st = gen_soft_threshold(30, 0.5, 1.5, 3);
    const auto b = audit_resolvent_lipschitz(st.resolvent(), st.constants(), 1000, 8, 2e-12);
    CHECK(b.violations == 0);
    CHECK(b.bound == doctest::Approx(1.0 / (1 + 1.5 * 0.5)));

    // nonlinear H through the separable path
    const auto H = SingleValuedOperator::diagonal_nonlinear(30, 1.2, 0.6);
    const ResolventEngine e(H, MultiValuedOperator::shifted_subdifferential(30, 1), 0.8);
    const auto hc = catalog_constants(H);
    const OperatorConstants c{hc.strong_monotonicity, hc.lipschitz, 1, 1.8, 1};
    const auto d = audit_resolvent_lipschitz(e, c, 1000, 9, 2 * e.inner_tolerance());
    CHECK(d.violations == 0);
}
