#include "rnp/model_core.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rnp {

namespace {

void check_positive_price(double p) {
    if (!(p > 0.0)) {
        throw std::domain_error("unit price must be > 0, got " + std::to_string(p));
    }
}

}  // namespace

void MarketParams::validate() const {
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("sigma must be > 0, got " + std::to_string(sigma));
    }
    if (!(r >= 0.0)) {
        throw std::invalid_argument("r must be >= 0, got " + std::to_string(r));
    }
    if (!(fee_annual >= 0.0)) {
        throw std::invalid_argument("fee_annual must be >= 0, got " + std::to_string(fee_annual));
    }
    if (!std::isfinite(mu)) {
        throw std::invalid_argument("mu must be finite");
    }
}

NormalizedPosition normalize_position(const PositionSpec& spec) {
    if (!(spec.s0 > 0.0) || !(spec.s_low > 0.0)) {
        throw std::invalid_argument("prices must be > 0");
    }
    if (!(spec.s_low < spec.s0)) {
        throw std::invalid_argument("invalid position: lower bound s_low=" +
                                    std::to_string(spec.s_low) + " must be < s0=" +
                                    std::to_string(spec.s0));
    }
    if (!(spec.s0 < spec.s_high)) {
        throw std::invalid_argument("invalid position: upper bound s_high=" +
                                    std::to_string(spec.s_high) + " must be > s0=" +
                                    std::to_string(spec.s0));
    }
    return make_position(spec.s_low / spec.s0, spec.s_high / spec.s0);
}

NormalizedPosition make_position(double l, double h) {
    if (!(l > 0.0 && l < 1.0)) {
        throw std::invalid_argument("invalid position: unit lower bound must be in (0,1), got " +
                                    std::to_string(l));
    }
    if (!(h > 1.0)) {
        throw std::invalid_argument("invalid position: unit upper bound must be > 1, got " +
                                    std::to_string(h));
    }
    const double denom = 2.0 - std::sqrt(l) - 1.0 / std::sqrt(h);
    NormalizedPosition pos{l, h, 1.0 / denom};
    return pos;
}

LogCoords log_coords(double p, const NormalizedPosition& pos, const MarketParams& market) {
    return log_coords_bounds(p, pos.l, pos.h, market);
}

LogCoords log_coords_bounds(double p, double lo, double hi, const MarketParams& market) {
    check_positive_price(p);
    if (!(lo > 0.0 && lo < hi)) {
        throw std::invalid_argument("bounds must satisfy 0 < lo < hi");
    }
    market.validate();
    LogCoords c;
    c.x = std::log(p) / market.sigma;
    c.a = std::log(lo) / market.sigma;
    c.b = std::log(hi) / market.sigma;
    c.a_prime = c.x - c.a;
    c.b_prime = c.b - c.x;
    c.mu_prime = market.mu / market.sigma - market.sigma / 2.0;
    return c;
}

double lp_payoff_v3(double p, const NormalizedPosition& pos) {
    check_positive_price(p);
    if (p < pos.l) {
        return pos.lq * p * (1.0 / std::sqrt(pos.l) - 1.0 / std::sqrt(pos.h));
    }
    if (p > pos.h) {
        return payoff_cap(pos);
    }
    return pos.lq * (2.0 * std::sqrt(p) - std::sqrt(pos.l) - p / std::sqrt(pos.h));
}

double lp_payoff_v2(double p) {
    check_positive_price(p);
    return std::sqrt(p);
}

double payoff_cap(const NormalizedPosition& pos) {
    return pos.lq * (std::sqrt(pos.h) - std::sqrt(pos.l));
}

GreeksReport payoff_greeks(double p, const NormalizedPosition& pos) {
    check_positive_price(p);
    GreeksReport g;
    g.pv = lp_payoff_v3(p, pos);
    g.vega = std::numeric_limits<double>::quiet_NaN();
    g.rho = std::numeric_limits<double>::quiet_NaN();
    g.at_kink = (p == pos.l || p == pos.h);
    if (p < pos.l) {
        g.delta = pos.lq * (1.0 / std::sqrt(pos.l) - 1.0 / std::sqrt(pos.h));
        g.gamma = 0.0;
    } else if (p > pos.h) {
        g.delta = 0.0;
        g.gamma = 0.0;
    } else {
        // Interior branch also covers the kinks themselves (one-sided value).
        g.delta = pos.lq * (1.0 / std::sqrt(p) - 1.0 / std::sqrt(pos.h));
        g.gamma = -pos.lq / (2.0 * p * std::sqrt(p));
    }
    return g;
}

}  // namespace rnp
