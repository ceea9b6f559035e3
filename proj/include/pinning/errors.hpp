#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pinning {

/// Invalid user-supplied parameters or config syntax.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Non-finite state or a solver that failed to converge.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, std::size_t step)
        : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class UnsupportedDimension : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pinning
