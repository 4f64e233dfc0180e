#pragma once

#include <stdexcept>
#include <string>

namespace rnp {

/// Root bracketing failed: no sign change on the scanned interval. Carries
/// the objective values at both bracket ends for diagnostics.
class NoRootError : public std::runtime_error {
public:
    NoRootError(const std::string& what, double f_lo, double f_hi)
        : std::runtime_error(what), f_lo_(f_lo), f_hi_(f_hi) {}

    [[nodiscard]] double f_lo() const noexcept { return f_lo_; }
    [[nodiscard]] double f_hi() const noexcept { return f_hi_; }

private:
    double f_lo_;
    double f_hi_;
};

/// Boundary optimization failed to converge; carries the best value found.
class OptimizerError : public std::runtime_error {
public:
    OptimizerError(const std::string& what, double best_value)
        : std::runtime_error(what), best_value_(best_value) {}

    [[nodiscard]] double best_value() const noexcept { return best_value_; }

private:
    double best_value_;
};

}  // namespace rnp
