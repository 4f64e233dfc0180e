#include "rnp/greeks.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rnp {

namespace {

// Central difference, falling back to one-sided when a bump leaves the
// allowed interval [lo_ok, hi_ok].
double first_diff(const std::function<double(double)>& f, double x, double h, double lo_ok,
                  double hi_ok, bool& clipped) {
    const bool up_ok = x + h < hi_ok;
    const bool dn_ok = x - h > lo_ok;
    if (up_ok && dn_ok) {
        return (f(x + h) - f(x - h)) / (2.0 * h);
    }
    clipped = true;
    if (up_ok) {
        return (f(x + h) - f(x)) / h;
    }
    return (f(x) - f(x - h)) / h;
}

double second_diff(const std::function<double(double)>& f, double x, double h, double lo_ok,
                   double hi_ok, bool& clipped) {
    const bool up_ok = x + h < hi_ok;
    const bool dn_ok = x - h > lo_ok;
    if (up_ok && dn_ok) {
        return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
    }
    clipped = true;
    if (up_ok) {
        return (f(x + 2.0 * h) - 2.0 * f(x + h) + f(x)) / (h * h);
    }
    return (f(x) - 2.0 * f(x - h) + f(x - 2.0 * h)) / (h * h);
}

std::string fmt_cell(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

void BumpConfig::validate() const {
    for (const double h : {h_spot_rel, h_sigma, h_r}) {
        if (!(h > 0.0 && h < 1e-2)) {
            throw std::invalid_argument("bump sizes must be in (0, 1e-2)");
        }
    }
}

GreeksReport fd_greeks(const PricingModel& model, double p, double sigma, double r,
                       const BumpConfig& cfg, double region_lo, double region_hi) {
    cfg.validate();
    GreeksReport g;
    g.pv = model(p, sigma, r);

    const double hp = cfg.h_spot_rel * p;
    bool clipped = false;
    auto in_p = [&](double x) { return model(x, sigma, r); };
    g.delta = first_diff(in_p, p, hp, region_lo, region_hi, clipped);
    g.gamma = second_diff(in_p, p, hp, region_lo, region_hi, clipped);

    auto in_sigma = [&](double x) { return model(p, x, r); };
    g.vega = first_diff(in_sigma, sigma, cfg.h_sigma, 0.0, 1e300, clipped);

    auto in_r = [&](double x) { return model(p, sigma, x); };
    // r = 0 is a valid rate, so allow the bump to land on it exactly.
    const bool r_dn_ok = r - cfg.h_r >= 0.0;
    if (r_dn_ok) {
        g.rho = (in_r(r + cfg.h_r) - in_r(r - cfg.h_r)) / (2.0 * cfg.h_r);
    } else {
        clipped = true;
        g.rho = (in_r(r + cfg.h_r) - in_r(r)) / cfg.h_r;
    }

    g.boundary_clipped = clipped;
    return g;
}

double spot_delta(double unit_delta, double s0) {
    if (!(s0 > 0.0)) {
        throw std::domain_error("s0 must be > 0");
    }
    return unit_delta / s0;
}

std::vector<GreeksTableRow> greeks_table(
    const std::vector<std::pair<std::string, MarketParams>>& markets,
    const NormalizedPosition& pos, double p, FeeMode mode, const BumpConfig& bump,
    const OptimizerConfig& opt) {
    std::vector<GreeksTableRow> rows;
    const bool prefix = markets.size() > 1;
    for (const auto& [name, market] : markets) {
        market.validate();
        const std::string tag = prefix ? name + "." : "";

        rows.push_back({tag + "payoff", payoff_greeks(p, pos)});

        PricingModel euro = [&pos, &market, mode](double pp, double ss, double rr) {
            MarketParams m = market;
            m.sigma = ss;
            m.r = rr;
            return price_european(pos, m, pp, mode).pv;
        };
        rows.push_back({tag + "european",
                        fd_greeks(euro, p, market.sigma, market.r, bump, pos.l, pos.h)});

        PricingModel amer = [&pos, &market, mode, &opt](double pp, double ss, double rr) {
            MarketParams m = market;
            m.sigma = ss;
            m.r = rr;
            return price_american(pos, m, pp, mode, opt).pv;
        };
        rows.push_back({tag + "american",
                        fd_greeks(amer, p, market.sigma, market.r, bump, pos.l, pos.h)});
    }
    return rows;
}

std::string render_greeks_table(const std::vector<GreeksTableRow>& rows) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-20s %12s %12s %12s %12s %12s\n", "model", "pv",
                  "delta", "gamma", "vega", "rho");
    out << line;
    for (const GreeksTableRow& row : rows) {
        std::snprintf(line, sizeof(line), "%-20s %12s %12s %12s %12s %12s\n",
                      row.model.c_str(), fmt_cell(row.greeks.pv).c_str(),
                      fmt_cell(row.greeks.delta).c_str(), fmt_cell(row.greeks.gamma).c_str(),
                      fmt_cell(row.greeks.vega).c_str(), fmt_cell(row.greeks.rho).c_str());
        out << line;
    }
    return out.str();
}

void write_greeks_csv(const std::vector<GreeksTableRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open greeks output file: " + path);
    }
    out << "model,pv,delta,gamma,vega,rho\n";
    char line[256];
    for (const GreeksTableRow& row : rows) {
        const GreeksReport& g = row.greeks;
        std::snprintf(line, sizeof(line), "%s,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                      row.model.c_str(), g.pv, g.delta, g.gamma, g.vega, g.rho);
        out << line;
    }
}

}  // namespace rnp
