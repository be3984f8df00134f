#pragma once

#include <stdexcept>
#include <string>

namespace ctlab {

// Shape/dimension disagreement between containers.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid argument value (out-of-range angle, negative threshold, ...).
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed file contents.
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values or solver breakdown.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Operation invoked in an invalid state (e.g. stepping a finished episode).
struct StateError : std::runtime_error {
    explicit StateError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ctlab
