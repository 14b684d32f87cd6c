#include "support.hpp"

#include "hmvi/analysis.hpp"
#include "hmvi/errors.hpp"
#include "hmvi/problems.hpp"
#include "hmvi/schemes.hpp"

#include <doctest.h>

#include <cmath>

using namespace hmvi;

namespace {

// Scalar resolvent map of 0 in (x - b) + x: F(x) = (x - lambda (x - b)) / (1 + lambda).
double scalar_F(double x, double b, double lambda)
{
    return (x - lambda * (x - b)) / (1 + lambda);
}

} // namespace

TEST_CASE("step sequences")
{
    const auto c = make_step_sequence(StepSequence::Family::constant, {0.9});
    CHECK(c(0) == 0.9);
    CHECK(c(1000) == 0.9);
    CHECK(c.properties().sums_to_infinity);
    CHECK_FALSE(c.properties().tends_to_zero);
    REQUIRE(c.properties().bounded_below_by);
    CHECK(*c.properties().bounded_below_by == 0.9);

    const auto h = make_step_sequence(StepSequence::Family::harmonic, {1});
    CHECK(h(0) == 1.0);
    CHECK(h(1) == 0.5);
    CHECK(h(2) == doctest::Approx(1.0 / 3));
    CHECK(h.properties().sums_to_infinity);
    CHECK(h.properties().tends_to_zero);

    const auto z = StepSequence::constant(0);
    CHECK_FALSE(z.properties().sums_to_infinity);

    const auto omh = StepSequence::one_minus_harmonic(2);
    CHECK(omh(0) == 0.5);
    CHECK(omh.properties().sums_to_infinity);
    CHECK_FALSE(omh.properties().tends_to_zero);

    const auto t = parse_step_sequence("table:0.2,0.4");
    CHECK(t(0) == 0.2);
    CHECK(t(1) == 0.4);
    CHECK(t(7) == 0.4);

    CHECK_THROWS_AS(StepSequence::constant(1.5), InputError);
    CHECK_THROWS_AS(StepSequence::harmonic(0.5), InputError);
    CHECK_THROWS_AS(parse_step_sequence("geometric:0.5"), InputError);
    CHECK(parse_step_sequence("harmonic").describe() == StepSequence::harmonic(1).describe());
    CHECK(parse_step_sequence(StepSequence::constant(0.3).describe())(4) == 0.3);

    CHECK(product_sums_to_infinity(StepSequence::constant(0.5), StepSequence::harmonic()));
    CHECK_FALSE(product_sums_to_infinity(StepSequence::harmonic(), StepSequence::harmonic()));
    CHECK(same_terms(StepSequence::constant(0.5), parse_step_sequence("table:0.5"), 100));
}

TEST_CASE("step sequence values stay in [0, 1]")
{
    testing::Gen gen(4);
    for (int trial = 0; trial < 200; ++trial) {
        const double v = gen.uniform(0, 1);
        const double o = gen.uniform(1, 20);
        for (const auto& s : {StepSequence::constant(v), StepSequence::harmonic(o), StepSequence::one_minus_harmonic(o)}) {
            for (std::size_t n : {0u, 1u, 10u, 1000u}) {
                CHECK(s(n) >= 0.0);
                CHECK(s(n) <= 1.0);
            }
        }
    }
}

TEST_CASE("f_map examples")
{
    const auto I = SingleValuedOperator::scaled_identity(1, 1);
    const auto Mi = MultiValuedOperator::scaled_identity(1, 1);
    const OperatorConstants ones{1, 1, 1, 1, 1};
    const ProblemInstance zero(I, I, Mi, ones, 1.0, Vector{0});
    CHECK(f_map(zero, Vector{17})[0] == doctest::Approx(0.0));

    const ProblemInstance half(I, I, Mi, ones, 0.5);
    // (1 + 0.5) y = 3 - 0.5 * 3
    CHECK(f_map(half, Vector{3})[0] == doctest::Approx((3 - 0.5 * 3) / 1.5));

    const auto p = gen_spd_linear(20, 1, 2, 3, 0.5);
    CHECK(distance(f_map(p, *p.known_solution()), *p.known_solution()) <= 1e-10);

    CHECK_THROWS_AS(ProblemInstance(I, I, Mi, ones, 1.0, Vector{1}), InputError);
}

TEST_CASE("run_fh")
{
    const auto p1 = gen_scalar_affine(2, 1);
    const auto t1 = run_fh(p1, Vector{-40});
    CHECK(t1.iterates[1][0] == doctest::Approx(1.0));
    CHECK(t1.converged);
    CHECK(t1.steps_used == 1);

    const auto p = gen_scalar_affine(2, 0.5);
    StoppingRule stop;
    stop.max_steps = 15;
    stop.stop_early = false;
    const auto t = run_fh(p, Vector{1e6}, stop);
    REQUIRE(t.errors);
    for (std::size_t n = 0; n + 1 < t.errors->size(); ++n) {
        CHECK((*t.errors)[n + 1] / (*t.errors)[n] == doctest::Approx(1.0 / 3).epsilon(1e-12));
    }
    CHECK(t.errors->size() == t.steps_used + 1);
    CHECK(t.residuals.size() == t.steps_used + 1);

    const auto at = run_fh(p, Vector{1});
    CHECK(at.steps_used == 0);
    CHECK(at.converged);
    CHECK(at.errors->front() == 0.0);
}

TEST_CASE("run_zgy")
{
    const auto p = gen_scalar_affine(2, 0.5);
    const Vector q0{7};
    const auto frozen = run_zgy(p, q0, StepSequence::constant(0), StepSequence::constant(0.5),
                                StoppingRule{1e-10, 20, true});
    for (const auto& q : frozen.iterates) CHECK(q == q0);
    CHECK_FALSE(frozen.hypothesis_notes.empty());

    StoppingRule five{0, 5, false};
    const auto t = run_zgy(p, q0, StepSequence::constant(0.5), StepSequence::constant(0.5), five);
    double q = 7;
    for (std::size_t n = 0; n <= 5; ++n) {
        CHECK(t.iterates[n][0] == doctest::Approx(q).epsilon(1e-14));
        const double r = 0.5 * q + 0.5 * scalar_F(q, 2, 0.5);
        q = 0.5 * q + 0.5 * scalar_F(r, 2, 0.5);
    }
}

TEST_CASE("run_mann per-step bound")
{
    const auto p = gen_scalar_affine(2, 0.5);
    const auto t = run_mann(p, Vector{50}, StepSequence::constant(0.5));
    REQUIRE(t.errors);
    for (std::size_t n = 0; n + 1 < t.errors->size(); ++n) {
        CHECK((*t.errors)[n + 1] <= (1 - 0.5 * (2.0 / 3)) * (*t.errors)[n] + 1e-15);
    }
    const auto still = run_mann(p, Vector{1}, StepSequence::constant(0.5));
    CHECK(still.steps_used == 0);
}

TEST_CASE("run_new")
{
    const auto p = gen_scalar_affine(0, 0.5);
    StoppingRule stop{0, 10, false};
    const auto t = run_new(p, Vector{1e3}, StepSequence::constant(1), stop);
    for (std::size_t n = 0; n + 1 < t.errors->size(); ++n) {
        CHECK((*t.errors)[n + 1] / (*t.errors)[n] == doctest::Approx(1.0 / 9).epsilon(1e-12));
    }
    const auto still = run_new(gen_scalar_affine(2, 0.5), Vector{1}, StepSequence::constant(0.3));
    CHECK(still.steps_used == 0);
    CHECK(still.iterates.front() == Vector{1});
}

TEST_CASE("collapse identities are bitwise")
{
    std::vector<ProblemInstance> problems{gen_scalar_affine(2, 0.5), gen_spd_linear(25, 1, 2, 4, 0.5),
                                          gen_soft_threshold(25, 1, 0.8, 4)};
    SpdLinearParams dp;
    dp.dim = 25;
    dp.seed = 4;
    dp.lambda = 0.3;
    problems.push_back(gen_diagonal_linear(dp));
    testing::Gen gen(77);
    for (const auto& p : problems) {
        const Vector x0 = gen.vector(p.dim(), 10);
        const auto fh = run_fh(p, x0);
        const auto zgy = run_zgy(p, x0, StepSequence::constant(1), StepSequence::constant(0));
        const auto mann = run_mann(p, x0, StepSequence::constant(1));
        const auto nw = run_new(p, x0, StepSequence::constant(0));
        for (const auto* t : {&zgy, &mann, &nw}) {
            REQUIRE(t->iterates.size() == fh.iterates.size());
            for (std::size_t n = 0; n < fh.iterates.size(); ++n) CHECK(t->iterates[n] == fh.iterates[n]);
        }
    }
}

TEST_CASE("contraction of F and monotone FH errors")
{
    testing::Gen gen(21);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto p = seed % 2 ? gen_spd_linear(15, 1, 1.5, seed, 0.5) : gen_soft_threshold(15, 1, 1, seed);
        const double kappa = p.kappa();
        REQUIRE(kappa < 1);
        for (int k = 0; k < 1000; ++k) {
            const Vector x = gen.vector(15, 3), y = gen.vector(15, 3);
            CHECK(distance(f_map(p, x), f_map(p, y)) <= kappa * distance(x, y) + 1e-8);
        }
        const auto t = run_fh(p, gen.vector(15, 5));
        for (std::size_t n = 0; n + 1 < t.errors->size(); ++n) {
            CHECK((*t.errors)[n + 1] <= kappa * (*t.errors)[n] + audit_slack(p));
        }
    }
}

TEST_CASE("divergent runs are traced and flagged")
{
    // scalar problem at a large lambda: kappa = sqrt(1 - 2L + L^2) / (1 + L) < 1 always, so use
    // explicit constants that violate contraction while the map still diverges
    const auto H = SingleValuedOperator::scaled_identity(1, 1);
    const auto A = SingleValuedOperator::scaled_identity(1, -3);
    const auto M = MultiValuedOperator::scaled_identity(1, 1);
    const ProblemInstance p(H, A, M, OperatorConstants{1, 1, 1, 3, 1}, 1.0, Vector{0});
    CHECK(p.kappa() >= 1);
    StoppingRule stop{1e-10, 2000, true};
    const auto t = run_fh(p, Vector{1}, stop);
    CHECK(t.hypothesis_violated);
    CHECK_FALSE(t.converged);
    CHECK(t.diverged);
}

TEST_CASE("inexact resolvents require separated tolerances")
{
    const auto H = SingleValuedOperator::diagonal_nonlinear(4, 1.5, 0.5);
    const auto A = SingleValuedOperator::scaled_identity(4, 2);
    const auto M = MultiValuedOperator::shifted_subdifferential(4, 1);
    ResolventOptions loose;
    loose.inner_tolerance = 1e-9;
    const ProblemInstance p(H, A, M, catalog_constants(H, A, M), 0.5, std::nullopt, loose);
    CHECK_THROWS_AS(run_fh(p, Vector::zeros(4), StoppingRule{1e-10, 100, true}), InputError);
    CHECK_NOTHROW(run_fh(p, Vector::zeros(4), StoppingRule{1e-7, 100, true}));
}
