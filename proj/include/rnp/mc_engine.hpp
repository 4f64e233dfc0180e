#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rnp/model_core.hpp"
#include "rnp/pricer.hpp"

namespace rnp {

/// Simulation controls. Results are a pure function of
/// (seed, paths, dt, t_max, bridge_correction); threads only changes how
/// the work is scheduled, never the estimate.
struct McConfig {
    std::int64_t paths = 100000;
    double dt = 1e-4;          // years per step
    double t_max = 100.0;      // horizon cap in years
    std::uint64_t seed = 0;
    bool bridge_correction = true;
    int threads = 0;           // 0 = hardware concurrency

    void validate() const;
};

struct HistogramBin {
    double lo = 0.0;
    double hi = 0.0;
    std::int64_t count = 0;
};

/// Monte Carlo estimate of the discounted position value, with the exit
/// classification and the component estimators used to cross-check each
/// closed-form factor independently.
struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t n_paths = 0;
    std::vector<HistogramBin> exit_histogram;
    double upper_exit_fraction = 0.0;
    double lower_exit_fraction = 0.0;
    double truncated_fraction = 0.0;

    // Per-side ranges of the discounted per-path value (NaN when no path
    // exited on that side); the gap between them is the bimodality check.
    double upper_value_min = 0.0;
    double upper_value_max = 0.0;
    double lower_value_min = 0.0;
    double lower_value_max = 0.0;

    // Component estimators with their standard errors:
    //   disc_upper ~ E[e^{-r tau}; upper exit]     (hit_upper_factor)
    //   disc_lower ~ E[e^{-r tau}; lower exit]     (hit_lower_factor)
    //   tau_disc   ~ E[tau e^{-r tau}]             (expected_discounted_tau)
    //   fee_integral ~ E[int_0^tau e^{-rt} dt]     ((1 - F(r))/r)
    double disc_upper_mean = 0.0, disc_upper_se = 0.0;
    double disc_lower_mean = 0.0, disc_lower_se = 0.0;
    double tau_disc_mean = 0.0, tau_disc_se = 0.0;
    double fee_integral_mean = 0.0, fee_integral_se = 0.0;
};

struct ConvergenceRow {
    std::int64_t paths = 0;
    double mean = 0.0;
    double std_error = 0.0;
    double closed_form_gap = 0.0;  // NaN when no closed form was supplied
};

/// Simulates GBM paths in log space until the first boundary crossing and
/// estimates the discounted value of the position under the given style and
/// fee mode. A Brownian-bridge crossing test between steps removes the
/// O(sqrt(dt)) barrier bias when bridge_correction is on.
[[nodiscard]] McEstimate mc_price(const NormalizedPosition& pos, const MarketParams& market,
                                  double p, const ExerciseStyle& style, FeeMode mode,
                                  const McConfig& cfg);

/// Runs mc_price at each ladder rung and reports the CLT scaling, plus the
/// gap to a closed-form value when one is supplied.
[[nodiscard]] std::vector<ConvergenceRow> convergence_report(
    const NormalizedPosition& pos, const MarketParams& market, double p,
    const ExerciseStyle& style, FeeMode mode, const McConfig& cfg,
    const std::vector<std::int64_t>& ladder,
    std::optional<double> closed_form = std::nullopt);

/// Writes the exit histogram as CSV: header bin_left,bin_right,count.
void write_histogram_csv(const std::vector<HistogramBin>& bins, const std::string& path);

}  // namespace rnp
