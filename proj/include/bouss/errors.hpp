#pragma once

#include <stdexcept>
#include <string>

namespace bouss {

// Invalid configuration or input data. Maps to CLI exit code 1.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// A scientific audit did not hold. Maps to CLI exit code 2.
class AuditFailure : public std::runtime_error {
public:
    AuditFailure(std::string module, std::string audit, std::string detail);
    const std::string& module() const { return module_; }
    const std::string& audit() const { return audit_; }
    const std::string& detail() const { return detail_; }

private:
    std::string module_, audit_, detail_;
};

// Numerical breakdown (singular factorization, NaN, stagnation).
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace bouss
