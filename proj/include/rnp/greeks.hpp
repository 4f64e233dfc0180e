#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rnp/model_core.hpp"
#include "rnp/pricer.hpp"

namespace rnp {

/// A valuation as a function of (unit spot, sigma, r); everything else is
/// captured by the closure.
using PricingModel = std::function<double(double p, double sigma, double r)>;

/// Bump sizes for finite differences. Spot bumps are relative, sigma and
/// rate bumps absolute; Greeks come out per unit of the bumped variable.
struct BumpConfig {
    double h_spot_rel = 1e-4;
    double h_sigma = 1e-4;
    double h_r = 1e-5;

    void validate() const;
};

/// Central-difference Greeks of an arbitrary pricing model. When a bumped
/// point would leave (region_lo, region_hi), or sigma/r would leave their
/// domains, a one-sided difference is used and boundary_clipped is set.
[[nodiscard]] GreeksReport fd_greeks(const PricingModel& model, double p, double sigma,
                                     double r, const BumpConfig& cfg = {},
                                     double region_lo = 0.0,
                                     double region_hi = 1e300);

/// Delta per quote-denominated spot rather than unit spot.
[[nodiscard]] double spot_delta(double unit_delta, double s0);

struct GreeksTableRow {
    std::string model;  // payoff | european | american (prefixed by set name)
    GreeksReport greeks;
};

/// Payoff / European / American Greeks for each named market at unit spot p.
[[nodiscard]] std::vector<GreeksTableRow> greeks_table(
    const std::vector<std::pair<std::string, MarketParams>>& markets,
    const NormalizedPosition& pos, double p, FeeMode mode,
    const BumpConfig& bump = {}, const OptimizerConfig& opt = {});

/// Aligned text rendering of a table, one row per model.
[[nodiscard]] std::string render_greeks_table(const std::vector<GreeksTableRow>& rows);

/// CSV with header model,pv,delta,gamma,vega,rho; undefined cells are `nan`.
void write_greeks_csv(const std::vector<GreeksTableRow>& rows, const std::string& path);

}  // namespace rnp
