#include "hmvi/resolvent.hpp"

#include "hmvi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace hmvi {

std::string_view to_string(ResolventStrategy s)
{
    switch (s) {
    case ResolventStrategy::closed_form_linear: return "closed-form-linear";
    case ResolventStrategy::separable_scalar: return "separable-scalar";
    case ResolventStrategy::newton_general: return "newton-general";
    }
    return "unknown";
}

namespace {

ResolventStrategy pick_strategy(const SingleValuedOperator& H, const MultiValuedOperator& M)
{
    if (H.is_linear() && M.is_single_valued()) return ResolventStrategy::closed_form_linear;
    if (H.is_separable() && M.is_separable()) return ResolventStrategy::separable_scalar;
    if (M.is_single_valued()) return ResolventStrategy::newton_general;
    throw UnsupportedOperator("no resolvent strategy for H = " + H.describe() + ", M = " + M.describe());
}

void check_strategy(ResolventStrategy s, const SingleValuedOperator& H, const MultiValuedOperator& M)
{
    switch (s) {
    case ResolventStrategy::closed_form_linear:
        if (!H.is_linear() || !M.is_single_valued()) {
            throw UnsupportedOperator("closed-form resolvent needs affine H and linear M");
        }
        break;
    case ResolventStrategy::separable_scalar:
        if (!H.is_separable() || !M.is_separable()) {
            throw UnsupportedOperator("separable resolvent needs coordinatewise H and M");
        }
        break;
    case ResolventStrategy::newton_general:
        if (!M.is_single_valued()) {
            throw UnsupportedOperator("Newton resolvent needs a single-valued (smooth) M");
        }
        break;
    }
}

int sign(double v)
{
    return (v > 0.0) - (v < 0.0);
}

} // namespace

ResolventEngine::ResolventEngine(SingleValuedOperator H, MultiValuedOperator M, double lambda,
                                 ResolventOptions options)
    : H_(std::move(H))
    , M_(std::move(M))
    , lambda_(lambda)
    , options_(options)
    , strategy_(ResolventStrategy::closed_form_linear)
{
    require_same_dim(H_.dim(), M_.dim(), "resolvent (H, M)");
    if (!(lambda_ > 0.0) || !std::isfinite(lambda_)) throw InputError("resolvent requires lambda > 0");
    if (!(options_.inner_tolerance > 0.0)) throw InputError("inner tolerance must be positive");
    if (options_.max_newton_iterations <= 0) throw InputError("Newton iteration cap must be positive");

    if (options_.strategy) {
        check_strategy(*options_.strategy, H_, M_);
        strategy_ = *options_.strategy;
    } else {
        strategy_ = pick_strategy(H_, M_);
    }

    if (strategy_ == ResolventStrategy::closed_form_linear) {
        h_constant_ = H_.constant_term();
        if (H_.is_separable() && M_.is_separable()) {
            diagonal_system_ = true;
            system_diagonal_ = H_.linear_part().diagonal() + lambda_ * M_.linear_diagonal();
            if ((system_diagonal_.array() == 0.0).any()) {
                throw ResolventDivergence("H + lambda M is singular");
            }
        } else {
            system_lu_.compute(H_.linear_part() + lambda_ * M_.linear_part());
        }
    }
}

bool ResolventEngine::is_exact() const
{
    return strategy_ == ResolventStrategy::closed_form_linear ||
           (strategy_ == ResolventStrategy::separable_scalar && H_.is_linear());
}

Vector ResolventEngine::resolve(const Vector& u) const
{
    return Vector(resolve(u.values()));
}

Eigen::VectorXd ResolventEngine::resolve(const Eigen::VectorXd& u) const
{
    return solve(u).x;
}

Resolved ResolventEngine::solve(const Eigen::VectorXd& u) const
{
    require_same_dim(dim(), u.size(), "resolve");
    switch (strategy_) {
    case ResolventStrategy::closed_form_linear: return solve_closed_form(u);
    case ResolventStrategy::separable_scalar: return solve_separable(u);
    case ResolventStrategy::newton_general: return solve_newton(u);
    }
    throw UnsupportedOperator("unknown resolvent strategy");
}

double ResolventEngine::inclusion_residual(const Eigen::VectorXd& u, const Resolved& r) const
{
    return (H_.apply(r.x) + lambda_ * r.selection - u).norm();
}

Resolved ResolventEngine::solve_closed_form(const Eigen::VectorXd& u) const
{
    Resolved out;
    const Eigen::VectorXd rhs = u - h_constant_;
    if (diagonal_system_) {
        out.x = rhs.cwiseQuotient(system_diagonal_);
    } else {
        out.x = system_lu_.solve(rhs);
    }
    out.selection = M_.selection(out.x);
    return out;
}

Resolved ResolventEngine::solve_separable(const Eigen::VectorXd& u) const
{
    const Index n = dim();
    const bool subdifferential = !M_.is_single_valued();
    const Eigen::VectorXd q = M_.linear_diagonal();
    const double coord_tol = options_.inner_tolerance / std::sqrt(static_cast<double>(n));

    Resolved out;
    out.x.resize(n);
    out.selection.resize(n);

    for (Index i = 0; i < n; ++i) {
        const double lq = lambda_ * q[i];
        const auto g = [&](double t) {
            const auto [v, dv] = H_.coordinate(i, t);
            return std::pair{v + lq * t, dv + lq};
        };
        const auto [g0, dg0] = g(0.0);

        double target = u[i];
        double subgradient = 0.0;
        if (subdifferential) {
            const double delta = u[i] - g0;
            if (std::abs(delta) <= lambda_) {
                // Zero is the solution; the subgradient absorbs the gap exactly.
                out.x[i] = 0.0;
                out.selection[i] = delta / lambda_;
                continue;
            }
            subgradient = sign(delta);
            target = u[i] - lambda_ * subgradient;
        }

        double x = 0.0;
        if (H_.is_linear()) {
            x = (target - g0) / dg0;
        } else {
            // g is increasing with secant slopes at least `lo`; the root lies
            // between 0 and (target - g0) / lo. Bisect a few times, then Newton
            // safeguarded by the bracket.
            const auto& k = std::get<DiagonalNonlinear>(H_.kind());
            const double lo = k.slope + std::min(0.0, k.tanh_weight) + lq;
            if (!(lo > 0.0)) throw UnsupportedOperator("separable resolvent: coordinate map is not increasing");
            double a = 0.0;
            double b = (target - g0) / lo;
            if (a > b) std::swap(a, b);
            x = 0.5 * (a + b);
            int it = 0;
            bool done = false;
            for (; it < options_.max_newton_iterations; ++it) {
                const auto [gx, dgx] = g(x);
                const double f = gx - target;
                if (std::abs(f) <= coord_tol) {
                    done = true;
                    break;
                }
                if (f > 0.0) {
                    b = x;
                } else {
                    a = x;
                }
                double next = x - f / dgx;
                if (it < 8 || !(next > a && next < b)) next = 0.5 * (a + b);
                x = next;
            }
            out.iterations = std::max(out.iterations, it);
            if (!done) {
                throw ResolventDivergence("separable resolvent did not reach inner tolerance at coordinate " +
                                          std::to_string(i));
            }
        }
        out.x[i] = x;
        out.selection[i] = q[i] * x + subgradient;
    }
    return out;
}

Resolved ResolventEngine::solve_newton(const Eigen::VectorXd& u) const
{
    const Eigen::MatrixXd Q = M_.linear_part();
    const auto residual = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return H_.apply(x) + lambda_ * (Q * x) - u;
    };

    Eigen::VectorXd x = Eigen::VectorXd::Zero(dim());
    Eigen::VectorXd G = residual(x);
    double phi = G.squaredNorm();
    int it = 0;
    for (; it < options_.max_newton_iterations; ++it) {
        if (std::sqrt(phi) <= options_.inner_tolerance) break;
        const Eigen::MatrixXd J = H_.jacobian(x) + lambda_ * Q;
        const Eigen::VectorXd step = J.partialPivLu().solve(-G);

        // Armijo backtracking on phi = ||G||^2.
        double t = 1.0;
        Eigen::VectorXd trial = x + step;
        Eigen::VectorXd G_trial = residual(trial);
        while (G_trial.squaredNorm() > (1.0 - 2e-4 * t) * phi && t > 1e-10) {
            t *= 0.5;
            trial = x + t * step;
            G_trial = residual(trial);
        }
        x = std::move(trial);
        G = std::move(G_trial);
        phi = G.squaredNorm();
    }
    if (!(std::sqrt(phi) <= options_.inner_tolerance)) {
        throw ResolventDivergence("Newton resolvent did not reach inner tolerance " +
                                  std::to_string(options_.inner_tolerance) + " within " +
                                  std::to_string(options_.max_newton_iterations) + " iterations");
    }
    Resolved out;
    out.selection = Q * x;
    out.x = std::move(x);
    out.iterations = it;
    return out;
}

double resolvent_lipschitz_bound(const OperatorConstants& c, double lambda)
{
    if (!(lambda > 0.0)) throw InputError("resolvent_lipschitz_bound requires lambda > 0");
    return 1.0 / (c.gamma + lambda * c.eta);
}

LipschitzAudit audit_resolvent_lipschitz(const ResolventEngine& engine, const OperatorConstants& c,
                                         std::size_t samples, std::uint64_t seed, double slack, double scale)
{
    LipschitzAudit audit;
    audit.samples = samples;
    audit.bound = resolvent_lipschitz_bound(c, engine.lambda());
    audit.max_excess = -std::numeric_limits<double>::infinity();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, scale);
    const Index n = engine.dim();
    Eigen::VectorXd u(n);
    Eigen::VectorXd v(n);
    for (std::size_t k = 0; k < samples; ++k) {
        for (Index i = 0; i < n; ++i) u[i] = normal(rng);
        for (Index i = 0; i < n; ++i) v[i] = normal(rng);
        const double duv = (u - v).norm();
        const double dr = (engine.resolve(u) - engine.resolve(v)).norm();
        const double excess = dr - audit.bound * duv;
        audit.max_excess = std::max(audit.max_excess, excess);
        if (duv > 0.0) audit.max_ratio = std::max(audit.max_ratio, dr / duv);
        if (excess > slack) ++audit.violations;
    }
    return audit;
}

} // namespace hmvi
