#pragma once

#include <stdexcept>
#include <string>

namespace madflow {

// Error families; the CLI maps them to exit codes (config -> 1, runtime -> 2, io -> 3).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateStateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Thrown when the per-snapshot phase step reaches the principal branch boundary,
// so centered phase rates are no longer trustworthy. Fix: smaller dt or stride.
class BranchWrapError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidLoopError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnreliableStatisticsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or truncated data files.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace madflow
