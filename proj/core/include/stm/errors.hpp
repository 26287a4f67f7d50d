#pragma once

#include <stdexcept>
#include <string>

namespace stm {

/// Invalid argument combination (bad stepsize, dimension mismatch, ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A model coefficient produced a non-finite value.
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unknown identifier (model name, scheme name).
class LookupError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace stm
