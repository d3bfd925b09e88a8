#pragma once

#include <stdexcept>
#include <string>

namespace depotsim {

/// Invalid configuration or physical parameter. Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Nodal value outside the domain of a conversion (e.g. non-positive c_H).
class DomainError : public std::runtime_error {
public:
    DomainError(const std::string& what, std::size_t node)
        : std::runtime_error(what + " at node " + std::to_string(node)), node_(node) {}
    std::size_t node() const { return node_; }

private:
    std::size_t node_;
};

/// Linear solve failure, loss of positivity, or a step that could not be
/// recovered by dt halving. Maps to CLI exit code 2.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace depotsim

namespace depotsim {

/// A time step whose result is unusable but may succeed with a smaller dt.
class StepRejected : public SolverError {
public:
    using SolverError::SolverError;
};

}  // namespace depotsim
