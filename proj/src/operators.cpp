#include "hmvi/operators.hpp"

#include "hmvi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace hmvi {

namespace {

template <class... Ts>
struct overloaded : Ts...
{
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool is_diagonal(const Eigen::MatrixXd& m)
{
    for (Index j = 0; j < m.cols(); ++j) {
        for (Index i = 0; i < m.rows(); ++i) {
            if (i != j && m(i, j) != 0.0) return false;
        }
    }
    return true;
}

void require_finite(double v, const char* what)
{
    if (!std::isfinite(v)) throw InputError(std::string(what) + " must be finite");
}

void require_square(const Eigen::MatrixXd& m, const char* what)
{
    if (m.rows() == 0 || m.rows() != m.cols()) {
        throw InputError(std::string(what) + ": matrix must be square and non-empty");
    }
    if (!m.allFinite()) throw InputError(std::string(what) + ": matrix entries must be finite");
}

double min_symmetric_eigenvalue(const Eigen::MatrixXd& m)
{
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double spectral_norm(const Eigen::MatrixXd& m)
{
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()(0);
}

// Bounds on the secant slopes (f(x) - f(y)) / (x - y) of coordinate i.
std::pair<double, double> slope_bounds(const SingleValuedOperator& op, Index i)
{
    return std::visit(
        overloaded{
            [](const ScaledIdentity& k) { return std::pair{k.scale, k.scale}; },
            [i](const AffineMap& k) { return std::pair{k.matrix(i, i), k.matrix(i, i)}; },
            [](const DiagonalNonlinear& k) {
                return std::pair{k.slope + std::min(0.0, k.tanh_weight),
                                 k.slope + std::max(0.0, k.tanh_weight)};
            },
        },
        op.kind());
}

Eigen::VectorXd standard_normal(Index dim, std::mt19937_64& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd v(dim);
    for (Index i = 0; i < dim; ++i) v[i] = normal(rng);
    return v;
}

} // namespace

// ---------------------------------------------------------------------------
// SingleValuedOperator

SingleValuedOperator::SingleValuedOperator(Kind kind, Index dim)
    : kind_(std::move(kind))
    , dim_(dim)
{
    if (dim_ <= 0) throw InputError("operator dimension must be positive");
}

SingleValuedOperator SingleValuedOperator::scaled_identity(Index dim, double scale)
{
    require_finite(scale, "scale");
    return {ScaledIdentity{scale}, dim};
}

SingleValuedOperator SingleValuedOperator::affine(Eigen::MatrixXd matrix, Eigen::VectorXd offset)
{
    require_square(matrix, "affine operator");
    require_same_dim(matrix.rows(), offset.size(), "affine operator offset");
    if (!offset.allFinite()) throw InputError("affine operator offset must be finite");
    const Index dim = matrix.rows();
    return {AffineMap{std::move(matrix), std::move(offset)}, dim};
}

SingleValuedOperator SingleValuedOperator::affine(Eigen::MatrixXd matrix)
{
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(matrix.rows());
    return affine(std::move(matrix), std::move(zero));
}

SingleValuedOperator SingleValuedOperator::diagonal_nonlinear(Index dim, double slope, double tanh_weight,
                                                              Eigen::VectorXd offset)
{
    require_finite(slope, "slope");
    require_finite(tanh_weight, "tanh_weight");
    require_same_dim(dim, offset.size(), "diagonal-nonlinear offset");
    if (!offset.allFinite()) throw InputError("diagonal-nonlinear offset must be finite");
    return {DiagonalNonlinear{slope, tanh_weight, std::move(offset)}, dim};
}

SingleValuedOperator SingleValuedOperator::diagonal_nonlinear(Index dim, double slope, double tanh_weight)
{
    return diagonal_nonlinear(dim, slope, tanh_weight, Eigen::VectorXd::Zero(dim));
}

Eigen::VectorXd SingleValuedOperator::apply(const Eigen::VectorXd& x) const
{
    require_same_dim(dim_, x.size(), "apply");
    return std::visit(overloaded{
                          [&](const ScaledIdentity& k) -> Eigen::VectorXd { return k.scale * x; },
                          [&](const AffineMap& k) -> Eigen::VectorXd { return k.matrix * x - k.offset; },
                          [&](const DiagonalNonlinear& k) -> Eigen::VectorXd {
                              return k.slope * x.array() + k.tanh_weight * x.array().tanh() - k.offset.array();
                          },
                      },
                      kind_);
}

Vector SingleValuedOperator::apply(const Vector& x) const
{
    return Vector(apply(x.values()));
}

Eigen::MatrixXd SingleValuedOperator::jacobian(const Eigen::VectorXd& x) const
{
    require_same_dim(dim_, x.size(), "jacobian");
    return std::visit(overloaded{
                          [&](const ScaledIdentity& k) -> Eigen::MatrixXd {
                              return k.scale * Eigen::MatrixXd::Identity(dim_, dim_);
                          },
                          [&](const AffineMap& k) -> Eigen::MatrixXd { return k.matrix; },
                          [&](const DiagonalNonlinear& k) -> Eigen::MatrixXd {
                              const Eigen::ArrayXd th = x.array().tanh();
                              Eigen::VectorXd d = k.slope + k.tanh_weight * (1.0 - th * th);
                              return d.asDiagonal();
                          },
                      },
                      kind_);
}

bool SingleValuedOperator::is_linear() const
{
    return !std::holds_alternative<DiagonalNonlinear>(kind_);
}

bool SingleValuedOperator::is_separable() const
{
    if (const auto* a = std::get_if<AffineMap>(&kind_)) return is_diagonal(a->matrix);
    return true;
}

std::pair<double, double> SingleValuedOperator::coordinate(Index i, double t) const
{
    return std::visit(overloaded{
                          [&](const ScaledIdentity& k) { return std::pair{k.scale * t, k.scale}; },
                          [&](const AffineMap& k) {
                              return std::pair{k.matrix(i, i) * t - k.offset[i], k.matrix(i, i)};
                          },
                          [&](const DiagonalNonlinear& k) {
                              const double th = std::tanh(t);
                              return std::pair{k.slope * t + k.tanh_weight * th - k.offset[i],
                                               k.slope + k.tanh_weight * (1.0 - th * th)};
                          },
                      },
                      kind_);
}

Eigen::MatrixXd SingleValuedOperator::linear_part() const
{
    if (const auto* a = std::get_if<AffineMap>(&kind_)) return a->matrix;
    if (const auto* s = std::get_if<ScaledIdentity>(&kind_)) {
        return s->scale * Eigen::MatrixXd::Identity(dim_, dim_);
    }
    throw UnsupportedOperator("linear_part: operator is not affine");
}

Eigen::VectorXd SingleValuedOperator::constant_term() const
{
    if (const auto* a = std::get_if<AffineMap>(&kind_)) return -a->offset;
    if (std::holds_alternative<ScaledIdentity>(kind_)) return Eigen::VectorXd::Zero(dim_);
    throw UnsupportedOperator("constant_term: operator is not affine");
}

std::string SingleValuedOperator::describe() const
{
    std::ostringstream out;
    std::visit(overloaded{
                   [&](const ScaledIdentity& k) { out << "scaled-identity(" << k.scale << ")"; },
                   [&](const AffineMap&) { out << "affine(" << dim_ << "x" << dim_ << ")"; },
                   [&](const DiagonalNonlinear& k) {
                       out << "diagonal-nonlinear(" << k.slope << "*t + " << k.tanh_weight << "*tanh(t))";
                   },
               },
               kind_);
    return out.str();
}

// ---------------------------------------------------------------------------
// MultiValuedOperator

MultiValuedOperator::MultiValuedOperator(Kind kind, Index dim)
    : kind_(std::move(kind))
    , dim_(dim)
{
    if (dim_ <= 0) throw InputError("operator dimension must be positive");
}

MultiValuedOperator MultiValuedOperator::linear(Eigen::MatrixXd matrix)
{
    require_square(matrix, "linear monotone operator");
    const Index dim = matrix.rows();
    return {LinearMonotone{std::move(matrix)}, dim};
}

MultiValuedOperator MultiValuedOperator::scaled_identity(Index dim, double scale)
{
    require_finite(scale, "scale");
    return {ScaledIdentity{scale}, dim};
}

MultiValuedOperator MultiValuedOperator::shifted_subdifferential(Index dim, double shift)
{
    require_finite(shift, "shift");
    if (shift <= 0.0) throw InputError("shifted subdifferential requires c > 0");
    return {ShiftedSubdifferential{shift}, dim};
}

Eigen::VectorXd MultiValuedOperator::selection(const Eigen::VectorXd& u) const
{
    require_same_dim(dim_, u.size(), "selection");
    return std::visit(overloaded{
                          [&](const LinearMonotone& k) -> Eigen::VectorXd { return k.matrix * u; },
                          [&](const ScaledIdentity& k) -> Eigen::VectorXd { return k.scale * u; },
                          [&](const ShiftedSubdifferential& k) -> Eigen::VectorXd {
                              return k.shift * u.array() + u.array().sign();
                          },
                      },
                      kind_);
}

Vector MultiValuedOperator::selection(const Vector& u) const
{
    return Vector(selection(u.values()));
}

bool MultiValuedOperator::is_single_valued() const
{
    return !std::holds_alternative<ShiftedSubdifferential>(kind_);
}

bool MultiValuedOperator::is_separable() const
{
    if (const auto* l = std::get_if<LinearMonotone>(&kind_)) return is_diagonal(l->matrix);
    return true;
}

Eigen::MatrixXd MultiValuedOperator::linear_part() const
{
    return std::visit(overloaded{
                          [&](const LinearMonotone& k) -> Eigen::MatrixXd { return k.matrix; },
                          [&](const ScaledIdentity& k) -> Eigen::MatrixXd {
                              return k.scale * Eigen::MatrixXd::Identity(dim_, dim_);
                          },
                          [&](const ShiftedSubdifferential& k) -> Eigen::MatrixXd {
                              return k.shift * Eigen::MatrixXd::Identity(dim_, dim_);
                          },
                      },
                      kind_);
}

Eigen::VectorXd MultiValuedOperator::linear_diagonal() const
{
    return std::visit(overloaded{
                          [&](const LinearMonotone& k) -> Eigen::VectorXd { return k.matrix.diagonal(); },
                          [&](const ScaledIdentity& k) -> Eigen::VectorXd {
                              return Eigen::VectorXd::Constant(dim_, k.scale);
                          },
                          [&](const ShiftedSubdifferential& k) -> Eigen::VectorXd {
                              return Eigen::VectorXd::Constant(dim_, k.shift);
                          },
                      },
                      kind_);
}

std::string MultiValuedOperator::describe() const
{
    std::ostringstream out;
    std::visit(overloaded{
                   [&](const LinearMonotone&) { out << "linear(" << dim_ << "x" << dim_ << ")"; },
                   [&](const ScaledIdentity& k) { out << "scaled-identity(" << k.scale << ")"; },
                   [&](const ShiftedSubdifferential& k) { out << "shifted-subdifferential(" << k.shift << ")"; },
               },
               kind_);
    return out.str();
}

// ---------------------------------------------------------------------------
// OperatorConstants

OperatorConstants OperatorConstants::make(double gamma, double tau, double r, double s, double eta)
{
    OperatorConstants c{gamma, tau, r, s, eta};
    c.check();
    return c;
}

void OperatorConstants::check() const
{
    const std::pair<const char*, double> fields[] = {
        {"gamma", gamma}, {"tau", tau}, {"r", r}, {"s", s}, {"eta", eta}};
    for (const auto& [name, value] : fields) {
        if (!std::isfinite(value) || value <= 0.0) {
            throw ConstantsError(std::string("constant ") + name + " must be finite and positive");
        }
    }
    // Relative slack absorbs rounding in constants computed from spectra.
    constexpr double rel = 1e-12;
    if (gamma > tau * (1.0 + rel)) {
        throw ConstantsError("inconsistent constants: gamma > tau (a strongly monotone map cannot "
                             "have Lipschitz constant below its monotonicity constant)");
    }
    if (r > s * tau * (1.0 + rel)) {
        throw ConstantsError("inconsistent constants: r > s * tau");
    }
}

// ---------------------------------------------------------------------------
// Validation

std::size_t ValidationReport::count(const std::string& inequality) const
{
    std::size_t n = 0;
    for (const auto& v : violations) n += (v.inequality == inequality);
    return n;
}

ValidationReport validate_constants(const SingleValuedOperator& H, const SingleValuedOperator& A,
                                    const MultiValuedOperator& M, const OperatorConstants& c,
                                    std::size_t samples, std::uint64_t seed)
{
    if (samples < 2) throw InputError("validate_constants needs at least 2 samples");
    require_same_dim(H.dim(), A.dim(), "validate_constants (H, A)");
    require_same_dim(H.dim(), M.dim(), "validate_constants (H, M)");

    const Index dim = H.dim();
    std::mt19937_64 rng(seed);
    ValidationReport report;
    report.samples = samples;

    // Relative tolerance covers rounding only; tightening any constant by
    // 1e-3 must still show up.
    constexpr double rel = 1e-12;
    const auto upper = [&](const char* name, const Eigen::VectorXd& x, const Eigen::VectorXd& y, double lhs,
                           double rhs) {
        if (lhs > rhs + rel * std::max(std::abs(lhs), std::abs(rhs))) {
            report.violations.push_back({name, Vector(x), Vector(y), lhs, rhs});
        }
    };
    const auto lower = [&](const char* name, const Eigen::VectorXd& x, const Eigen::VectorXd& y, double lhs,
                           double rhs) {
        if (lhs < rhs - rel * std::max(std::abs(lhs), std::abs(rhs))) {
            report.violations.push_back({name, Vector(x), Vector(y), lhs, rhs});
        }
    };

    for (std::size_t k = 0; k < samples; ++k) {
        const Eigen::VectorXd x = standard_normal(dim, rng);
        const Eigen::VectorXd y = standard_normal(dim, rng);
        const Eigen::VectorXd d = x - y;
        const double d2 = d.squaredNorm();
        const double dn = std::sqrt(d2);

        const Eigen::VectorXd dh = H.apply(x) - H.apply(y);
        const Eigen::VectorXd da = A.apply(x) - A.apply(y);
        const Eigen::VectorXd dm = M.selection(x) - M.selection(y);

        upper("H-lipschitz", x, y, dh.norm(), c.tau * dn);
        lower("H-strong-monotonicity", x, y, dh.dot(d), c.gamma * d2);
        upper("A-lipschitz", x, y, da.norm(), c.s * dn);
        lower("A-strong-monotonicity-wrt-H", x, y, da.dot(dh), c.r * d2);
        lower("M-monotonicity", x, y, dm.dot(d), 0.0);
        lower("M-strong-monotonicity", x, y, dm.dot(d), c.eta * d2);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Catalog constants

SingleConstants catalog_constants(const SingleValuedOperator& H)
{
    if (H.is_separable()) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        double lip = 0.0;
        for (Index i = 0; i < H.dim(); ++i) {
            const auto [a, b] = slope_bounds(H, i);
            lo = std::min(lo, a);
            hi = std::max(hi, b);
            lip = std::max({lip, std::abs(a), std::abs(b)});
        }
        return {lo, lip};
    }
    const Eigen::MatrixXd m = H.linear_part();
    return {min_symmetric_eigenvalue(m), spectral_norm(m)};
}

double catalog_constants(const MultiValuedOperator& M)
{
    if (M.is_separable()) return M.linear_diagonal().minCoeff();
    return min_symmetric_eigenvalue(M.linear_part());
}

OperatorConstants catalog_constants(const SingleValuedOperator& H, const SingleValuedOperator& A,
                                    const MultiValuedOperator& M)
{
    require_same_dim(H.dim(), A.dim(), "catalog_constants (H, A)");
    require_same_dim(H.dim(), M.dim(), "catalog_constants (H, M)");

    const SingleConstants h = catalog_constants(H);
    const SingleConstants a = catalog_constants(A);
    const double eta = catalog_constants(M);

    double r = 0.0;
    if (H.is_separable() && A.is_separable()) {
        // <Ax - Ay, Hx - Hy> is a sum of per-coordinate products of secant
        // slopes; the infimum pairs the smallest slopes.
        r = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < H.dim(); ++i) {
            const double lo_h = slope_bounds(H, i).first;
            const double lo_a = slope_bounds(A, i).first;
            if (lo_h <= 0.0 || lo_a <= 0.0) {
                throw UnsupportedOperator("catalog_constants: A is not strongly monotone w.r.t. H");
            }
            r = std::min(r, lo_h * lo_a);
        }
    } else if (H.is_linear() && A.is_linear()) {
        r = min_symmetric_eigenvalue(A.linear_part().transpose() * H.linear_part());
    } else {
        throw UnsupportedOperator("catalog_constants: no closed form for r with " + H.describe() + " and " +
                                  A.describe());
    }
    return OperatorConstants::make(h.strong_monotonicity, h.lipschitz, r, a.lipschitz, eta);
}

} // namespace hmvi
