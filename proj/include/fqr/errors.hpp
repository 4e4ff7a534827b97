#pragma once

#include <stdexcept>
#include <string>

namespace fqr {

/// Malformed or inconsistent input data (bad CSV rows, violated data
/// preconditions, schema mismatches). The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure (singular systems, non-convergent repairs, degenerate
/// model selection). The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fqr
