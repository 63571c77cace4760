#pragma once

#include <stdexcept>
#include <string>

namespace freemult {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad inputs: malformed documents, broken measure invariants, parameters
// outside their stated domain. The CLI maps these to exit code 2.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(what) {}
};

// Numerical failures: fixed-point non-convergence, root tracking lost,
// branch of a power/log undefined, turning points. Exit code 3.
class NumericError : public Error {
public:
    NumericError(const std::string& kind, const std::string& what)
        : Error(kind + ": " + what), kind_(kind) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

}  // namespace freemult
