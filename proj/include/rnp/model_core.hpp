#pragma once

#include <string>

namespace rnp {

/// Market environment for a range position: GBM drift/volatility, discount
/// rate, and the annualized rebate (fee) rate earned while the position is
/// in range. All rates are per year.
struct MarketParams {
    double mu = 0.0;          // annualized drift
    double sigma = 0.0;       // annualized volatility, > 0
    double r = 0.0;           // risk-free rate, >= 0
    double fee_annual = 0.0;  // annual rebate rate C_a, >= 0

    [[nodiscard]] double fee_daily() const noexcept { return fee_annual / 365.0; }

    /// Throws std::invalid_argument if any field is out of range.
    void validate() const;
};

/// Range position in quote-denominated prices: inception spot and the two
/// bounds, with s_low < s0 < s_high strictly.
struct PositionSpec {
    double s0 = 0.0;
    double s_low = 0.0;
    double s_high = 0.0;
};

/// Position normalized to unit inception price. l = S_L/S0, h = S_H/S0 and
/// lq = 1/(2 - sqrt(l) - 1/sqrt(h)) scales the position so its value at
/// unit price is exactly 1.
struct NormalizedPosition {
    double l = 0.0;   // lower unit bound, in (0, 1)
    double h = 0.0;   // upper unit bound, > 1
    double lq = 0.0;  // liquidity parameter, > 0
};

/// Log-price coordinates shared by every closed form: x = ln(p)/sigma with
/// bounds a = ln(lo)/sigma, b = ln(hi)/sigma, distances a' = x - a and
/// b' = b - x, and the risk-adjusted drift mu' = mu/sigma - sigma/2.
struct LogCoords {
    double x = 0.0;
    double a = 0.0;
    double b = 0.0;
    double a_prime = 0.0;
    double b_prime = 0.0;
    double mu_prime = 0.0;

    [[nodiscard]] double span() const noexcept { return b - a; }
    [[nodiscard]] bool live() const noexcept { return a_prime > 0.0 && b_prime > 0.0; }
};

/// Sensitivities of a valuation to spot, spot curvature, volatility and
/// rate, all per unit of the bumped variable. vega/rho are NaN where the
/// model has no such sensitivity (pure payoff).
struct GreeksReport {
    double pv = 0.0;
    double delta = 0.0;
    double gamma = 0.0;
    double vega = 0.0;
    double rho = 0.0;
    bool at_kink = false;           // evaluated exactly on a payoff kink
    bool boundary_clipped = false;  // one-sided differences were needed
};

/// Converts quote-price bounds to unit bounds and the liquidity parameter.
/// Throws std::invalid_argument naming the violated bound on bad ordering.
[[nodiscard]] NormalizedPosition normalize_position(const PositionSpec& spec);

/// Builds a NormalizedPosition directly from unit bounds 0 < l < 1 < h.
[[nodiscard]] NormalizedPosition make_position(double l, double h);

/// Log coordinates of unit price p against the position's own bounds.
[[nodiscard]] LogCoords log_coords(double p, const NormalizedPosition& pos,
                                   const MarketParams& market);

/// Log coordinates against arbitrary unit bounds 0 < lo < hi (used for
/// early-exit boundaries sitting inside the position range).
[[nodiscard]] LogCoords log_coords_bounds(double p, double lo, double hi,
                                          const MarketParams& market);

/// Unit value of a concentrated-liquidity position at unit price p:
/// linear in p below l, 2*sqrt(p)-shaped inside the range, constant above h.
/// Normalized so the value at p = 1 is exactly 1.
[[nodiscard]] double lp_payoff_v3(double p, const NormalizedPosition& pos);

/// Unit value of a full-range constant-product position: sqrt(p).
[[nodiscard]] double lp_payoff_v2(double p);

/// Upper payoff cap lq*(sqrt(h) - sqrt(l)), attained for all p >= h.
[[nodiscard]] double payoff_cap(const NormalizedPosition& pos);

/// Analytic delta/gamma of lp_payoff_v3. vega and rho are NaN. Exactly on a
/// kink (p == l or p == h) the interior one-sided value is reported with
/// at_kink set.
[[nodiscard]] GreeksReport payoff_greeks(double p, const NormalizedPosition& pos);

}  // namespace rnp
