#pragma once

#include "hmvi/operators.hpp"

#include <cstdint>
#include <optional>
#include <string_view>

namespace hmvi {

enum class ResolventStrategy
{
    closed_form_linear,
    separable_scalar,
    newton_general,
};

std::string_view to_string(ResolventStrategy s);

struct ResolventOptions
{
    /// Forced strategy; chosen from the operator kinds when empty.
    std::optional<ResolventStrategy> strategy;
    /// Residual bound ||Hx + lambda m(x) - u|| for iterative strategies.
    double inner_tolerance = 1e-12;
    int max_newton_iterations = 100;
};

struct Resolved
{
    Eigen::VectorXd x;
    /// The element m(x) of M(x) realising u = Hx + lambda m(x).
    Eigen::VectorXd selection;
    int iterations = 0;
};

/// Evaluates (H + lambda M)^{-1}. Immutable after construction and safe to
/// share between concurrent solver runs.
class ResolventEngine
{
public:
    ResolventEngine(SingleValuedOperator H, MultiValuedOperator M, double lambda, ResolventOptions options = {});

    Index dim() const { return H_.dim(); }
    double lambda() const { return lambda_; }
    ResolventStrategy strategy() const { return strategy_; }
    double inner_tolerance() const { return options_.inner_tolerance; }
    /// True for strategies whose output is exact up to rounding.
    bool is_exact() const;

    const SingleValuedOperator& H() const { return H_; }
    const MultiValuedOperator& M() const { return M_; }

    Vector resolve(const Vector& u) const;
    Eigen::VectorXd resolve(const Eigen::VectorXd& u) const;
    Resolved solve(const Eigen::VectorXd& u) const;

    /// ||Hx + lambda * selection - u||
    double inclusion_residual(const Eigen::VectorXd& u, const Resolved& r) const;

private:
    Resolved solve_closed_form(const Eigen::VectorXd& u) const;
    Resolved solve_separable(const Eigen::VectorXd& u) const;
    Resolved solve_newton(const Eigen::VectorXd& u) const;

    SingleValuedOperator H_;
    MultiValuedOperator M_;
    double lambda_;
    ResolventOptions options_;
    ResolventStrategy strategy_;

    // closed-form data: diagonal systems are divided directly, others factorised once
    bool diagonal_system_ = false;
    Eigen::VectorXd system_diagonal_;
    Eigen::PartialPivLU<Eigen::MatrixXd> system_lu_;
    Eigen::VectorXd h_constant_;
};

/// Lipschitz constant 1 / (gamma + lambda eta) of the resolvent.
double resolvent_lipschitz_bound(const OperatorConstants& c, double lambda);

struct LipschitzAudit
{
    std::size_t samples = 0;
    std::size_t violations = 0;
    double bound = 0.0;
    /// Largest observed ||R(u) - R(v)|| / ||u - v||.
    double max_ratio = 0.0;
    /// Largest ||R(u) - R(v)|| - bound ||u - v||.
    double max_excess = 0.0;
};

/// Checks ||R(u) - R(v)|| <= bound ||u - v|| + slack over seeded random pairs
/// with entries drawn from N(0, scale^2).
LipschitzAudit audit_resolvent_lipschitz(const ResolventEngine& engine, const OperatorConstants& c,
                                         std::size_t samples, std::uint64_t seed, double slack,
                                         double scale = 1.0);

} // namespace hmvi
