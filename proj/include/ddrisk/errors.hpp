#pragma once

#include <stdexcept>
#include <string>

namespace ddrisk {

/// Malformed or inconsistent input (bad probabilities, ragged rows, ...).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A point outside the domain of an operation, e.g. a portion vector with a
/// nonpositive holding period return where a logarithm is needed.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Enumeration would exceed the configured evaluation budget.
class BudgetError : public std::length_error {
public:
    using std::length_error::length_error;
};

} // namespace ddrisk
