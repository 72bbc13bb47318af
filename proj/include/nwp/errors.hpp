#pragma once

#include <stdexcept>
#include <string>

namespace nwp {

// Bad argument values, dimension mismatches, out-of-range parameters.
class InvalidInputError : public std::invalid_argument {
public:
    explicit InvalidInputError(const std::string& what) : std::invalid_argument(what) {}
};

// Data that is structurally valid but unusable (single-class labels, empty groups).
class DegenerateDataError : public std::runtime_error {
public:
    explicit DegenerateDataError(const std::string& what) : std::runtime_error(what) {}
};

// CSV / schema / file-format problems while loading datasets.
class IngestionError : public std::runtime_error {
public:
    explicit IngestionError(const std::string& what) : std::runtime_error(what) {}
};

// Bad or missing run configuration.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace nwp
