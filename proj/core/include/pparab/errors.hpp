#ifndef PPARAB_ERRORS_HPP
#define PPARAB_ERRORS_HPP

#include <stdexcept>

namespace pparab {

/// Bad user-facing configuration: scenario files, CLI arguments, mismatched
/// tabulated data. Maps to exit code 2 in the CLI.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Unrecoverable solver failure (dt underflow, non-finite state).
/// Maps to exit code 3 in the CLI.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace pparab

#endif
