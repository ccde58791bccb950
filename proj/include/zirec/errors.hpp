#pragma once

#include <stdexcept>
#include <string>

namespace zirec {

/// Argument outside the mathematical domain of a function (negative time, stick outside (0,1)).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A caller broke a documented precondition.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Inconsistent configuration or mismatched dimensions.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or invalid input data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A probability vector with no mass anywhere.
class DegenerateDistribution : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace zirec
