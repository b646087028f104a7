#ifndef FRACFACT_ERROR_HPP
#define FRACFACT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace fracfact {

// Base for all library errors. Subtypes map to CLI exit codes.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad input files, malformed words/models, inconsistent dimensions. Exit code 2.
struct ParseError : Error {
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

// Numeric failure (non-convergence, singular system). Exit code 3.
struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

// Enumeration or completion exceeded its configured budget. Exit code 4.
struct BudgetError : Error {
    explicit BudgetError(const std::string& msg) : Error(msg) {}
};

} // namespace fracfact

#endif
