#pragma once

#include <stdexcept>

namespace hmvi {

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: dimension mismatch, out-of-range parameter, bad config.
class InputError : public Error
{
public:
    using Error::Error;
};

/// Operator constants that contradict each other or admit no usable lambda.
class ConstantsError : public Error
{
public:
    using Error::Error;
};

class UnsupportedOperator : public Error
{
public:
    using Error::Error;
};

/// An inner resolvent solve failed to reach its tolerance within the cap.
class ResolventDivergence : public Error
{
public:
    using Error::Error;
};

class CannotCompare : public Error
{
public:
    using Error::Error;
};

} // namespace hmvi
