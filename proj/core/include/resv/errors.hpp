#pragma once

#include <stdexcept>
#include <string>

namespace resv {

/// Integration left the admissible region (non-finite state, norm blow-up,
/// or step-size underflow). `last_valid_time` is the last time at which the
/// state was still accepted.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, double last_valid_time)
        : std::runtime_error(what), last_valid_time_(last_valid_time) {}

    [[nodiscard]] double last_valid_time() const noexcept { return last_valid_time_; }

private:
    double last_valid_time_;
};

/// A shifted reservoir matrix (A + lambda I) is singular: lambda coincides
/// with a negated eigenvalue of A.
class SpectralCollisionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Euler-Maruyama step violates the explicit stability guard.
class StepSizeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or incomplete experiment configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace resv
