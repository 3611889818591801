#pragma once

#include <stdexcept>
#include <string>

namespace collapse
{

// Bad input: malformed config, non-Hermitian operators, degenerate A,
// dimension mismatches. The CLI maps these to exit code 1.
class ValidationError : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

// Failure during a run: norm drift above tolerance, NaN/Inf, I/O.
// The CLI maps these to exit code 2.
class NumericalError : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

}
