#pragma once

#include <functional>
#include <limits>
#include <variant>

#include "rnp/barrier_laplace.hpp"
#include "rnp/model_core.hpp"

namespace rnp {

/// Hold-to-boundary contract: value realized only when price first touches
/// a range bound.
struct European {};

/// Early-exit contract carrying the exit boundaries l1 < spot < l2 in unit
/// price. NaN boundaries mean "to be optimized".
struct American {
    double l1 = std::numeric_limits<double>::quiet_NaN();
    double l2 = std::numeric_limits<double>::quiet_NaN();
};

using ExerciseStyle = std::variant<European, American>;

/// Present value split into the position leg and the rebate leg, with the
/// style and fee mode that produced it. stopped means the spot was outside
/// the live region, so pv is just the payoff and the fee leg is zero.
struct PricingResult {
    double pv = 0.0;
    double lp_leg = 0.0;
    double fee_leg = 0.0;
    ExerciseStyle style{European{}};
    FeeMode fee_mode = FeeMode::AtClose;
    bool stopped = false;
};

/// Controls for the two-boundary search: grid resolution per axis, value
/// tolerance for the refinement stage, and the relative clamp keeping
/// candidate boundaries away from the spot.
struct OptimizerConfig {
    int grid_n = 64;
    double refine_tol = 1e-10;
    double boundary_margin = 1e-6;

    void validate() const;
};

/// Hold-to-boundary value: payoff-weighted hit factors plus the fee leg.
/// Outside (l, h) returns the stopped payoff with a zero fee leg.
[[nodiscard]] PricingResult price_european(const NormalizedPosition& pos,
                                           const MarketParams& market, double p,
                                           FeeMode mode);

/// Early-exit value at fixed boundaries l <= l1 < p < l2 <= h: the
/// two-boundary objective with payoffs taken at l1, l2 and fees accruing
/// until the optimized exit.
[[nodiscard]] PricingResult price_american_at(const NormalizedPosition& pos,
                                              const MarketParams& market, double p,
                                              double l1, double l2, FeeMode mode);

/// Early-exit value maximized over the boundary pair: grid seeding in log
/// space followed by coordinate-wise golden-section refinement. The result
/// dominates both the European value and immediate exercise.
[[nodiscard]] PricingResult price_american(const NormalizedPosition& pos,
                                           const MarketParams& market, double p,
                                           FeeMode mode, const OptimizerConfig& cfg = {});

/// Constant-product (full-range) position priced with the same two-boundary
/// objective, sqrt payoffs at the exits, and a unit fee-leg multiplier:
/// rebates are quoted directly as an annual rate on position value.
[[nodiscard]] PricingResult price_v2(const MarketParams& market, double p, double l1,
                                     double l2, FeeMode mode);

/// price_v2 with boundaries optimized over the search box (box_lo, box_hi).
[[nodiscard]] PricingResult price_v2_optimal(const MarketParams& market, double p,
                                             double box_lo, double box_hi, FeeMode mode,
                                             const OptimizerConfig& cfg = {});

/// Any of the static pricers with the annual fee rate produced by
/// fee_fn(market.sigma). A constant fee_fn reproduces the static path
/// bit for bit. Throws std::domain_error if fee_fn returns a negative rate.
[[nodiscard]] PricingResult price_with_dynamic_fee(
    const NormalizedPosition& pos, const MarketParams& market, double p,
    const ExerciseStyle& style, FeeMode mode,
    const std::function<double(double)>& fee_fn, const OptimizerConfig& cfg = {});

}  // namespace rnp
