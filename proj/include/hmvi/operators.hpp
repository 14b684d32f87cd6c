#pragma once

#include "hmvi/space.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace hmvi {

/// x -> c x
struct ScaledIdentity
{
    double scale;
};

/// x -> M x - b
struct AffineMap
{
    Eigen::MatrixXd matrix;
    Eigen::VectorXd offset;
};

/// x_i -> slope * x_i + tanh_weight * tanh(x_i) - offset_i
///
/// With slope > 0 and tanh_weight >= 0 each coordinate map has derivative in
/// [slope, slope + tanh_weight], which gives the catalog constants directly.
struct DiagonalNonlinear
{
    double slope;
    double tanh_weight;
    Eigen::VectorXd offset;
};

/// Single-valued map R^n -> R^n (the H and A of the inclusion).
class SingleValuedOperator
{
public:
    using Kind = std::variant<ScaledIdentity, AffineMap, DiagonalNonlinear>;

    static SingleValuedOperator scaled_identity(Index dim, double scale);
    static SingleValuedOperator affine(Eigen::MatrixXd matrix, Eigen::VectorXd offset);
    static SingleValuedOperator affine(Eigen::MatrixXd matrix);
    static SingleValuedOperator diagonal_nonlinear(Index dim, double slope, double tanh_weight,
                                                   Eigen::VectorXd offset);
    static SingleValuedOperator diagonal_nonlinear(Index dim, double slope, double tanh_weight);

    Index dim() const { return dim_; }
    const Kind& kind() const { return kind_; }

    Vector apply(const Vector& x) const;
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;

    /// Affine in x (scaled identity or affine map).
    bool is_linear() const;
    /// Acts coordinate by coordinate.
    bool is_separable() const;

    /// Value and derivative of coordinate i's scalar map; requires is_separable().
    std::pair<double, double> coordinate(Index i, double t) const;

    /// Linear part as a dense matrix; requires is_linear().
    Eigen::MatrixXd linear_part() const;
    /// Constant term c so that apply(x) = linear_part() x + c; requires is_linear().
    Eigen::VectorXd constant_term() const;

    std::string describe() const;

private:
    SingleValuedOperator(Kind kind, Index dim);

    Kind kind_;
    Index dim_;
};

/// u -> c u + d|u| per coordinate, c > 0.
struct ShiftedSubdifferential
{
    double shift;
};

/// u -> Q u with Q symmetric positive definite.
struct LinearMonotone
{
    Eigen::MatrixXd matrix;
};

/// Multivalued map R^n -> 2^(R^n). Only the pieces the solvers need are
/// modelled: its linear part, whether it carries the l1 subdifferential, and
/// a monotone selection for validation.
class MultiValuedOperator
{
public:
    using Kind = std::variant<LinearMonotone, ScaledIdentity, ShiftedSubdifferential>;

    static MultiValuedOperator linear(Eigen::MatrixXd matrix);
    static MultiValuedOperator scaled_identity(Index dim, double scale);
    static MultiValuedOperator shifted_subdifferential(Index dim, double shift);

    Index dim() const { return dim_; }
    const Kind& kind() const { return kind_; }

    /// An element of M(u). At zero coordinates of the subdifferential kind the
    /// selection picks 0 from [-1, 1].
    Vector selection(const Vector& u) const;
    Eigen::VectorXd selection(const Eigen::VectorXd& u) const;

    bool is_single_valued() const;
    bool is_separable() const;

    /// Linear part Q (the c u of the subdifferential kind).
    Eigen::MatrixXd linear_part() const;
    /// Diagonal of Q; requires is_separable().
    Eigen::VectorXd linear_diagonal() const;

    std::string describe() const;

private:
    MultiValuedOperator(Kind kind, Index dim);

    Kind kind_;
    Index dim_;
};

/// Strong monotonicity and Lipschitz constants of the problem data:
/// H is gamma-strongly monotone and tau-Lipschitz, A is s-Lipschitz and
/// r-strongly monotone with respect to H, M is eta-strongly monotone.
///
/// Some sources reuse gamma for A's constant relative to H; here gamma always
/// belongs to H and the cross constant is r, so the Cauchy-Schwarz consistency
/// condition reads r <= s * tau.
struct OperatorConstants
{
    double gamma;
    double tau;
    double r;
    double s;
    double eta;

    /// Validates positivity, gamma <= tau and r <= s * tau; throws ConstantsError.
    static OperatorConstants make(double gamma, double tau, double r, double s, double eta);

    void check() const;
};

struct Violation
{
    std::string inequality;
    Vector x;
    Vector y;
    double lhs;
    double rhs;
};

struct ValidationReport
{
    std::size_t samples = 0;
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    std::size_t count(const std::string& inequality) const;
};

/// Samples `samples` standard-normal pairs and checks every defining
/// inequality of the declared constants. Sampling can only falsify.
ValidationReport validate_constants(const SingleValuedOperator& H, const SingleValuedOperator& A,
                                    const MultiValuedOperator& M, const OperatorConstants& c,
                                    std::size_t samples, std::uint64_t seed);

struct SingleConstants
{
    double strong_monotonicity;
    double lipschitz;
};

/// Analytic gamma/tau of a catalog H. Affine maps must be symmetric.
SingleConstants catalog_constants(const SingleValuedOperator& H);
/// Analytic eta of a catalog M.
double catalog_constants(const MultiValuedOperator& M);
/// Full constant set for catalog (H, A, M). Throws UnsupportedOperator when
/// the cross constant r has no closed form for the pair.
OperatorConstants catalog_constants(const SingleValuedOperator& H, const SingleValuedOperator& A,
                                    const MultiValuedOperator& M);

} // namespace hmvi
