#include "rnp/pricer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rnp/errors.hpp"

namespace rnp {

namespace {

void check_spot(double p) {
    if (!(p > 0.0)) {
        throw std::domain_error("spot must be > 0");
    }
}

PricingResult stopped_result(double payoff, ExerciseStyle style, FeeMode mode) {
    PricingResult res;
    res.lp_leg = payoff;
    res.fee_leg = 0.0;
    res.pv = payoff;
    res.style = std::move(style);
    res.fee_mode = mode;
    res.stopped = true;
    return res;
}

// The shared two-boundary objective: exit payoffs weighted by the hit-leg
// factors plus the fee leg accruing until the exit, all in the coordinates
// of the boundaries (lo, hi).
PricingResult two_boundary_value(const MarketParams& market, double p, double lo, double hi,
                                 double payoff_lo, double payoff_hi, double fee_lq,
                                 FeeMode mode) {
    const LogCoords coords = log_coords_bounds(p, lo, hi, market);
    const TransformInputs inp{coords, market.r};
    PricingResult res;
    res.lp_leg = payoff_hi * hit_upper_factor(inp) + payoff_lo * hit_lower_factor(inp);
    res.fee_leg = fee_leg(inp, fee_lq, market.fee_annual, mode);
    res.pv = res.lp_leg + res.fee_leg;
    res.style = American{lo, hi};
    res.fee_mode = mode;
    return res;
}

// Golden-section maximization of f over [lo, hi], seeded unimodal bracket.
template <typename F>
double golden_max(F&& f, double lo, double hi, double xtol) {
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    while (hi - lo > xtol) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    return 0.5 * (lo + hi);
}

struct BoundarySearch {
    double l1 = 0.0;
    double l2 = 0.0;
    double value = 0.0;
};

// Grid seeding in log space over (box_lo, p) x (p, box_hi), then alternating
// golden-section passes on each boundary until the value stops improving.
template <typename Objective>
BoundarySearch optimize_boundaries(Objective&& objective, double p, double box_lo,
                                   double box_hi, const OptimizerConfig& cfg) {
    const double l1_max = p * (1.0 - cfg.boundary_margin);
    const double l2_min = p * (1.0 + cfg.boundary_margin);
    if (!(box_lo < l1_max) || !(l2_min < box_hi)) {
        throw std::domain_error("search box must straddle the spot");
    }

    const int n = cfg.grid_n;
    std::vector<double> g1(n), g2(n);
    const double log_lo = std::log(box_lo);
    const double log_l1max = std::log(l1_max);
    const double log_l2min = std::log(l2_min);
    const double log_hi = std::log(box_hi);
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / (n - 1);
        g1[i] = std::exp(log_lo + t * (log_l1max - log_lo));
        g2[i] = std::exp(log_l2min + t * (log_hi - log_l2min));
    }
    g1.front() = box_lo;  // keep the exact corners as candidates
    g2.back() = box_hi;

    BoundarySearch best{g1[0], g2[0], -std::numeric_limits<double>::infinity()};
    int bi = 0, bj = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double v = objective(g1[i], g2[j]);
            if (v > best.value) {
                best = {g1[i], g2[j], v};
                bi = i;
                bj = j;
            }
        }
    }

    // Refine around the best grid cell. xtol well below boundary_margin so
    // restarting with a denser grid lands on the same optimum.
    double lo1 = g1[std::max(bi - 1, 0)];
    double hi1 = g1[std::min(bi + 1, n - 1)];
    double lo2 = g2[std::max(bj - 1, 0)];
    double hi2 = g2[std::min(bj + 1, n - 1)];
    const double xtol = 1e-12 + cfg.refine_tol;

    constexpr int kMaxRounds = 200;
    int round = 0;
    for (; round < kMaxRounds; ++round) {
        const double prev = best.value;
        const double l1 =
            golden_max([&](double v) { return objective(std::exp(v), best.l2); },
                       std::log(lo1), std::log(hi1), xtol);
        best.l1 = std::min(std::exp(l1), l1_max);
        const double l2 =
            golden_max([&](double v) { return objective(best.l1, std::exp(v)); },
                       std::log(lo2), std::log(hi2), xtol);
        best.l2 = std::max(std::exp(l2), l2_min);
        best.value = objective(best.l1, best.l2);
        if (std::abs(best.value - prev) <= cfg.refine_tol) {
            break;
        }
    }
    if (round == kMaxRounds) {
        throw OptimizerError("boundary optimization did not converge", best.value);
    }
    return best;
}

}  // namespace

void OptimizerConfig::validate() const {
    if (grid_n < 8) {
        throw std::invalid_argument("grid_n must be >= 8");
    }
    if (!(refine_tol > 0.0)) {
        throw std::invalid_argument("refine_tol must be > 0");
    }
    if (!(boundary_margin > 0.0 && boundary_margin < 1e-2)) {
        throw std::invalid_argument("boundary_margin must be in (0, 1e-2)");
    }
}

PricingResult price_european(const NormalizedPosition& pos, const MarketParams& market,
                             double p, FeeMode mode) {
    check_spot(p);
    market.validate();
    if (p <= pos.l || p >= pos.h) {
        return stopped_result(lp_payoff_v3(p, pos), European{}, mode);
    }
    PricingResult res = two_boundary_value(market, p, pos.l, pos.h, lp_payoff_v3(pos.l, pos),
                                           lp_payoff_v3(pos.h, pos), pos.lq, mode);
    res.style = European{};
    return res;
}

PricingResult price_american_at(const NormalizedPosition& pos, const MarketParams& market,
                                double p, double l1, double l2, FeeMode mode) {
    check_spot(p);
    market.validate();
    if (!(pos.l <= l1 && l1 < p && p < l2 && l2 <= pos.h)) {
        throw std::domain_error("boundaries must satisfy l <= l1 < p < l2 <= h");
    }
    return two_boundary_value(market, p, l1, l2, lp_payoff_v3(l1, pos),
                              lp_payoff_v3(l2, pos), pos.lq, mode);
}

PricingResult price_american(const NormalizedPosition& pos, const MarketParams& market,
                             double p, FeeMode mode, const OptimizerConfig& cfg) {
    check_spot(p);
    market.validate();
    cfg.validate();
    if (p <= pos.l || p >= pos.h) {
        return stopped_result(lp_payoff_v3(p, pos), American{p, p}, mode);
    }

    auto objective = [&](double l1, double l2) {
        return two_boundary_value(market, p, l1, l2, lp_payoff_v3(l1, pos),
                                  lp_payoff_v3(l2, pos), pos.lq, mode)
            .pv;
    };
    const BoundarySearch best = optimize_boundaries(objective, p, pos.l, pos.h, cfg);

    // The exit-now value is the l2 -> p (or l1 -> p) limit of the objective;
    // the clamp keeps the search a margin away from it, so compare directly.
    const double immediate = lp_payoff_v3(p, pos);
    if (immediate > best.value) {
        PricingResult res;
        res.lp_leg = immediate;
        res.fee_leg = 0.0;
        res.pv = immediate;
        res.style = American{best.l1, best.l2};
        res.fee_mode = mode;
        return res;
    }
    return price_american_at(pos, market, p, best.l1, best.l2, mode);
}

PricingResult price_v2(const MarketParams& market, double p, double l1, double l2,
                       FeeMode mode) {
    check_spot(p);
    market.validate();
    if (!(0.0 < l1 && l1 < p && p < l2)) {
        throw std::domain_error("boundaries must satisfy 0 < l1 < p < l2");
    }
    return two_boundary_value(market, p, l1, l2, lp_payoff_v2(l1), lp_payoff_v2(l2),
                              1.0, mode);
}

PricingResult price_v2_optimal(const MarketParams& market, double p, double box_lo,
                               double box_hi, FeeMode mode, const OptimizerConfig& cfg) {
    check_spot(p);
    market.validate();
    cfg.validate();
    if (!(0.0 < box_lo && box_lo < p && p < box_hi)) {
        throw std::domain_error("search box must satisfy 0 < box_lo < p < box_hi");
    }
    auto objective = [&](double l1, double l2) {
        return price_v2(market, p, l1, l2, mode).pv;
    };
    const BoundarySearch best = optimize_boundaries(objective, p, box_lo, box_hi, cfg);
    const double immediate = lp_payoff_v2(p);
    if (immediate > best.value) {
        PricingResult res;
        res.lp_leg = immediate;
        res.pv = immediate;
        res.style = American{best.l1, best.l2};
        res.fee_mode = mode;
        return res;
    }
    return price_v2(market, p, best.l1, best.l2, mode);
}

PricingResult price_with_dynamic_fee(const NormalizedPosition& pos,
                                     const MarketParams& market, double p,
                                     const ExerciseStyle& style, FeeMode mode,
                                     const std::function<double(double)>& fee_fn,
                                     const OptimizerConfig& cfg) {
    const double fee = fee_fn(market.sigma);
    if (!(fee >= 0.0)) {
        throw std::domain_error("dynamic fee function returned a negative rate");
    }
    MarketParams adjusted = market;
    adjusted.fee_annual = fee;
    if (std::holds_alternative<European>(style)) {
        return price_european(pos, adjusted, p, mode);
    }
    const American& am = std::get<American>(style);
    if (std::isnan(am.l1) || std::isnan(am.l2)) {
        return price_american(pos, adjusted, p, mode, cfg);
    }
    return price_american_at(pos, adjusted, p, am.l1, am.l2, mode);
}

}  // namespace rnp
