#pragma once

#include <stdexcept>
#include <string>

namespace srh {

/// Violated precondition or type-level contract (programming error at the call site).
class contract_error : public std::logic_error {
public:
    explicit contract_error(const std::string& what) : std::logic_error(what) {}
};

/// Invalid scenario or configuration input (user error, maps to CLI exit code 2).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical breakdown at runtime (solver divergence, positivity loss below floor).
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace srh
