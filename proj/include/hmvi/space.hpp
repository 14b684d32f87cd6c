#pragma once

#include <Eigen/Dense>

#include <initializer_list>
#include <span>

namespace hmvi {

using Index = Eigen::Index;

/// Element of the model space R^n. Always non-empty with finite entries.
class Vector
{
public:
    explicit Vector(Eigen::VectorXd values);
    Vector(std::initializer_list<double> values);

    static Vector zeros(Index dim);
    static Vector constant(Index dim, double value);

    Index dim() const { return values_.size(); }
    double operator[](Index i) const { return values_[i]; }

    const Eigen::VectorXd& values() const { return values_; }
    std::span<const double> entries() const
    {
        return {values_.data(), static_cast<std::size_t>(values_.size())};
    }

    friend bool operator==(const Vector& a, const Vector& b)
    {
        return a.values_.size() == b.values_.size() && (a.values_.array() == b.values_.array()).all();
    }

private:
    Eigen::VectorXd values_;
};

double inner(const Vector& a, const Vector& b);
double norm(const Vector& a);
double distance(const Vector& a, const Vector& b);

/// alpha * a + beta * b, evaluated componentwise.
Vector combine(double alpha, const Vector& a, double beta, const Vector& b);

void require_same_dim(Index a, Index b, const char* what);

} // namespace hmvi
