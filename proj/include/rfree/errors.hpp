#pragma once

#include <stdexcept>
#include <string>

namespace rfree {

// Precondition violations on caller-supplied arguments.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A requested table does not fit the configured memory budget.
class ResourceLimitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A computed integer would not fit its storage width.
class ArithmeticOverflow : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

// The quantity is undefined for the given input, e.g. a main term for a
// progression whose gcd is not r-free.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Experiment configuration rejected before any work is done.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Something that the number theory guarantees cannot happen did happen.
class InternalConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace rfree
