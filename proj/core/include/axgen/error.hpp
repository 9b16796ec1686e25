#pragma once

#include <stdexcept>
#include <string>

namespace axgen {

/// Malformed or inconsistent input data (CSV cells, JSON documents, shapes).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or argument combination.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Internal consistency failure: a netlist that is not a DAG, a wire with two
/// drivers. Always a bug in the builder, never a user error.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace axgen
