#pragma once

#include <stdexcept>
#include <string>

namespace evcg {

/// Base class for every error raised by the library.
class error : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

/// Dimension or shape mismatch between a game and the objects evaluated on it.
class structural_error : public error
{
public:
	using error::error;
};

/// A load outside the cost function's validity interval [0, W].
class domain_error : public error
{
public:
	using error::error;
};

/// Average cost requested for a group of zero weight.
class undefined_average_error : public error
{
public:
	using error::error;
};

/// Operation only defined for a particular game shape (e.g. the 3-slot case).
class unsupported_error : public error
{
public:
	using error::error;
};

/// A cost family was asked for a derivative it does not provide.
class missing_derivative_error : public error
{
public:
	using error::error;
};

/// Invalid construction arguments (violated invariant).
class invalid_argument_error : public error
{
public:
	using error::error;
};

/// Root bracket without a sign change, or non-finite values in the dynamics.
class numeric_error : public error
{
public:
	using error::error;
};

/// Malformed scenario configuration or input file.
class config_error : public error
{
public:
	using error::error;
};

} // namespace evcg
