#pragma once

#include <cmath>

#include "rnp/model_core.hpp"

namespace rnp {

/// Inputs to the two-sided first-passage transforms: live log coordinates
/// and a discount rate. The composite theta = sqrt(mu'^2 + 2r) appears in
/// every hyperbolic term.
struct TransformInputs {
    LogCoords coords;
    double r = 0.0;

    [[nodiscard]] double theta() const noexcept {
        return std::sqrt(coords.mu_prime * coords.mu_prime + 2.0 * r);
    }
};

/// How rebates are withdrawn. Continuous withdrawal at the instant of
/// accrual is the upper bound on the fee value; a single withdrawal when
/// the position closes is the lower bound.
enum class FeeMode {
    Continuous,
    AtClose,
};

/// E[e^{-r tau}; exit at the upper bound] for drifted Brownian motion
/// started at x in (a, b). Value in (0, 1); the theta = 0 degenerate point
/// returns the ruin-probability limit a'/(a'+b').
[[nodiscard]] double hit_upper_factor(const TransformInputs& inp);

/// E[e^{-r tau}; exit at the lower bound], mirror of hit_upper_factor.
[[nodiscard]] double hit_lower_factor(const TransformInputs& inp);

/// F(r) = E[e^{-r tau}], the Laplace transform of the exit time. Equals
/// hit_upper_factor + hit_lower_factor; F(0) = 1.
[[nodiscard]] double survival_transform(const TransformInputs& inp);

/// E[tau e^{-r tau}] = -F'(r), from the hand-differentiated closed form.
[[nodiscard]] double expected_discounted_tau(const TransformInputs& inp);

/// Present value of rebates accruing at rate fee_annual * lq while the
/// position is live. Continuous mode discounts the running stream,
/// fee_annual * lq * (1 - F(r))/r; AtClose discounts the lump at exit,
/// fee_annual * lq * E[tau e^{-r tau}]. Continuous >= AtClose always.
[[nodiscard]] double fee_leg(const TransformInputs& inp, double lq, double fee_annual,
                             FeeMode mode);

}  // namespace rnp
