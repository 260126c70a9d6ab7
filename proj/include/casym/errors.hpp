#pragma once

#include <stdexcept>
#include <string>

namespace casym {

// Bad user input (config schema, out-of-range parameters, malformed CSV).
// The CLI maps it to exit status 1.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// An iterative solver ran out of iterations. Exit status 2.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The velocity variance vanished somewhere on the grid, so the stationary
// Fokker-Planck density does not exist. Exit status 2.
class DegenerateDiffusionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Statistic undefined for the given input (zero variance, no labeled posts).
class UndefinedStatisticError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

} // namespace casym
