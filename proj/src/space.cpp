#include "hmvi/space.hpp"

#include "hmvi/errors.hpp"

#include <string>

namespace hmvi {

Vector::Vector(Eigen::VectorXd values)
    : values_(std::move(values))
{
    if (values_.size() == 0) {
        throw InputError("vector must have positive dimension");
    }
    if (!values_.allFinite()) {
        throw InputError("vector entries must be finite");
    }
}

Vector::Vector(std::initializer_list<double> values)
    : Vector(Eigen::Map<const Eigen::VectorXd>(values.begin(), static_cast<Index>(values.size())))
{
}

Vector Vector::zeros(Index dim)
{
    return Vector(Eigen::VectorXd::Zero(dim));
}

Vector Vector::constant(Index dim, double value)
{
    return Vector(Eigen::VectorXd::Constant(dim, value));
}

void require_same_dim(Index a, Index b, const char* what)
{
    if (a != b) {
        throw InputError(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                         std::to_string(b) + ")");
    }
}

double inner(const Vector& a, const Vector& b)
{
    require_same_dim(a.dim(), b.dim(), "inner");
    return a.values().dot(b.values());
}

double norm(const Vector& a)
{
    return a.values().norm();
}

double distance(const Vector& a, const Vector& b)
{
    require_same_dim(a.dim(), b.dim(), "distance");
    return (a.values() - b.values()).norm();
}

Vector combine(double alpha, const Vector& a, double beta, const Vector& b)
{
    require_same_dim(a.dim(), b.dim(), "combine");
    return Vector(Eigen::VectorXd(alpha * a.values() + beta * b.values()));
}

} // namespace hmvi
