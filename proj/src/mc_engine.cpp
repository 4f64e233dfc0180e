#include "rnp/mc_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

#include "rnp/philox.hpp"

namespace rnp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::int64_t kChunk = 8192;
constexpr int kHistogramBins = 64;

enum class Exit : std::int8_t { Upper = 0, Lower = 1, Truncated = 2 };

struct PathOutcome {
    double total = 0.0;      // discounted position value incl. fee leg
    double disc = 0.0;       // e^{-r tau} at exit (or at t_max)
    double tau_disc = 0.0;   // tau e^{-r tau}
    double fee_int = 0.0;    // int_0^tau e^{-rt} dt
    Exit exit = Exit::Truncated;
};

struct Accum {
    double sum = 0.0, sumsq = 0.0;
    double up_sum = 0.0, up_sumsq = 0.0;
    double lo_sum = 0.0, lo_sumsq = 0.0;
    double tau_sum = 0.0, tau_sumsq = 0.0;
    double fee_sum = 0.0, fee_sumsq = 0.0;
    std::int64_t n_upper = 0, n_lower = 0, n_trunc = 0;
    double up_min = std::numeric_limits<double>::infinity();
    double up_max = -std::numeric_limits<double>::infinity();
    double lo_min = std::numeric_limits<double>::infinity();
    double lo_max = -std::numeric_limits<double>::infinity();

    void add(const PathOutcome& o) {
        sum += o.total;
        sumsq += o.total * o.total;
        const double du = (o.exit == Exit::Upper) ? o.disc : 0.0;
        const double dl = (o.exit == Exit::Lower) ? o.disc : 0.0;
        up_sum += du;
        up_sumsq += du * du;
        lo_sum += dl;
        lo_sumsq += dl * dl;
        tau_sum += o.tau_disc;
        tau_sumsq += o.tau_disc * o.tau_disc;
        fee_sum += o.fee_int;
        fee_sumsq += o.fee_int * o.fee_int;
        switch (o.exit) {
            case Exit::Upper:
                ++n_upper;
                up_min = std::min(up_min, o.total);
                up_max = std::max(up_max, o.total);
                break;
            case Exit::Lower:
                ++n_lower;
                lo_min = std::min(lo_min, o.total);
                lo_max = std::max(lo_max, o.total);
                break;
            case Exit::Truncated:
                ++n_trunc;
                break;
        }
    }

    void combine(const Accum& o) {
        sum += o.sum;
        sumsq += o.sumsq;
        up_sum += o.up_sum;
        up_sumsq += o.up_sumsq;
        lo_sum += o.lo_sum;
        lo_sumsq += o.lo_sumsq;
        tau_sum += o.tau_sum;
        tau_sumsq += o.tau_sumsq;
        fee_sum += o.fee_sum;
        fee_sumsq += o.fee_sumsq;
        n_upper += o.n_upper;
        n_lower += o.n_lower;
        n_trunc += o.n_trunc;
        up_min = std::min(up_min, o.up_min);
        up_max = std::max(up_max, o.up_max);
        lo_min = std::min(lo_min, o.lo_min);
        lo_max = std::max(lo_max, o.lo_max);
    }
};

struct SimSetup {
    double y0 = 0.0;           // starting log price
    double y_lo = 0.0, y_hi = 0.0;
    double payoff_lo = 0.0, payoff_hi = 0.0;
    double fee_scale = 0.0;    // fee_annual * lq multiplier
    bool continuous_fees = false;
    double drift_step = 0.0, vol_step = 0.0;
    double disc_step = 0.0;
    double inv_var_step = 0.0;  // 1 / (sigma^2 dt)
    std::int64_t max_steps = 0;
    double dt = 0.0;
    bool bridge = true;
};

PathOutcome simulate_path(const SimSetup& s, const NormalizedPosition& pos,
                          std::uint64_t seed, std::uint64_t path_index) {
    const PathRng rng(seed, path_index);
    PathOutcome out;
    double y = s.y0;
    double disc = 1.0;
    double fee_int = 0.0;
    for (std::int64_t k = 1; k <= s.max_steps; ++k) {
        const auto draw = rng.step(static_cast<std::uint64_t>(k));
        const double y_next = y + s.drift_step + s.vol_step * draw.normal;
        const double disc_next = disc * s.disc_step;
        fee_int += 0.5 * s.dt * (disc + disc_next);
        const double t_next = static_cast<double>(k) * s.dt;

        bool hit_upper = y_next >= s.y_hi;
        bool hit_lower = y_next <= s.y_lo;
        if (!hit_upper && !hit_lower && s.bridge) {
            // Brownian-bridge crossing probabilities over the step.
            const double eu = -2.0 * (s.y_hi - y) * (s.y_hi - y_next) * s.inv_var_step;
            const double el = -2.0 * (y - s.y_lo) * (y_next - s.y_lo) * s.inv_var_step;
            const double p_up = (eu > -40.0) ? std::exp(eu) : 0.0;
            const double p_lo = (el > -40.0) ? std::exp(el) : 0.0;
            if (draw.uniform < p_up) {
                hit_upper = true;
            } else if (draw.uniform < p_up + p_lo) {
                hit_lower = true;
            }
        }
        if (hit_upper || hit_lower) {
            out.exit = hit_upper ? Exit::Upper : Exit::Lower;
            out.disc = disc_next;
            out.tau_disc = t_next * disc_next;
            out.fee_int = fee_int;
            const double payoff = hit_upper ? s.payoff_hi : s.payoff_lo;
            const double fee = s.fee_scale * (s.continuous_fees ? fee_int : out.tau_disc);
            out.total = payoff * disc_next + fee;
            return out;
        }
        y = y_next;
        disc = disc_next;
    }
    // Horizon cap: value the position where it stands, fees accrued so far
    // (AtClose withdraws the lump at the cap).
    const double t_end = static_cast<double>(s.max_steps) * s.dt;
    out.exit = Exit::Truncated;
    out.disc = disc;
    out.tau_disc = t_end * disc;
    out.fee_int = fee_int;
    const double fee = s.fee_scale * (s.continuous_fees ? fee_int : out.tau_disc);
    out.total = lp_payoff_v3(std::exp(y), pos) * disc + fee;
    return out;
}

double std_error_of(double sum, double sumsq, std::int64_t n) {
    if (n < 2) {
        return 0.0;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = std::max(0.0, (sumsq - static_cast<double>(n) * mean * mean) /
                                         static_cast<double>(n - 1));
    return std::sqrt(var / static_cast<double>(n));
}

std::vector<HistogramBin> build_histogram(const std::vector<double>& totals) {
    std::vector<HistogramBin> bins;
    if (totals.empty()) {
        return bins;
    }
    const auto [mn_it, mx_it] = std::minmax_element(totals.begin(), totals.end());
    const double lo = *mn_it;
    const double hi = *mx_it;
    if (!(hi > lo)) {
        bins.push_back({lo, hi, static_cast<std::int64_t>(totals.size())});
        return bins;
    }
    const double width = (hi - lo) / kHistogramBins;
    bins.resize(kHistogramBins);
    for (int i = 0; i < kHistogramBins; ++i) {
        bins[i] = {lo + i * width, lo + (i + 1) * width, 0};
    }
    bins.back().hi = hi;
    for (const double v : totals) {
        int idx = static_cast<int>((v - lo) / width);
        idx = std::clamp(idx, 0, kHistogramBins - 1);
        ++bins[idx].count;
    }
    return bins;
}

}  // namespace

void McConfig::validate() const {
    if (paths < 1) {
        throw std::invalid_argument("paths must be >= 1");
    }
    if (!(dt > 0.0 && dt <= 1e-2)) {
        throw std::invalid_argument("dt must be in (0, 1e-2]");
    }
    if (!(t_max >= 1.0)) {
        throw std::invalid_argument("t_max must be >= 1");
    }
}

McEstimate mc_price(const NormalizedPosition& pos, const MarketParams& market, double p,
                    const ExerciseStyle& style, FeeMode mode, const McConfig& cfg) {
    cfg.validate();
    market.validate();

    double lo = pos.l;
    double hi = pos.h;
    if (const auto* am = std::get_if<American>(&style)) {
        lo = am->l1;
        hi = am->l2;
        if (!(pos.l <= lo && hi <= pos.h)) {
            throw std::domain_error("exit boundaries must lie inside the position range");
        }
    }
    if (!(lo < p && p < hi)) {
        throw std::domain_error("spot must be strictly inside the simulated barriers");
    }

    SimSetup s;
    s.y0 = std::log(p);
    s.y_lo = std::log(lo);
    s.y_hi = std::log(hi);
    s.payoff_lo = lp_payoff_v3(lo, pos);
    s.payoff_hi = lp_payoff_v3(hi, pos);
    s.fee_scale = market.fee_annual * pos.lq;
    s.continuous_fees = (mode == FeeMode::Continuous);
    s.drift_step = (market.mu - 0.5 * market.sigma * market.sigma) * cfg.dt;
    s.vol_step = market.sigma * std::sqrt(cfg.dt);
    s.disc_step = std::exp(-market.r * cfg.dt);
    s.inv_var_step = 1.0 / (market.sigma * market.sigma * cfg.dt);
    s.max_steps = static_cast<std::int64_t>(std::ceil(cfg.t_max / cfg.dt - 1e-9));
    s.dt = cfg.dt;
    s.bridge = cfg.bridge_correction;

    const std::int64_t n = cfg.paths;
    const std::int64_t n_chunks = (n + kChunk - 1) / kChunk;
    std::vector<double> totals(static_cast<std::size_t>(n));
    std::vector<Accum> accums(static_cast<std::size_t>(n_chunks));

    auto run_chunk = [&](std::int64_t chunk) {
        const std::int64_t begin = chunk * kChunk;
        const std::int64_t end = std::min(begin + kChunk, n);
        Accum& acc = accums[static_cast<std::size_t>(chunk)];
        for (std::int64_t i = begin; i < end; ++i) {
            const PathOutcome o =
                simulate_path(s, pos, cfg.seed, static_cast<std::uint64_t>(i));
            totals[static_cast<std::size_t>(i)] = o.total;
            acc.add(o);
        }
    };

    int n_threads = cfg.threads > 0 ? cfg.threads
                                    : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::max(1, std::min<int>(n_threads, static_cast<int>(n_chunks)));
    if (n_threads == 1) {
        for (std::int64_t c = 0; c < n_chunks; ++c) {
            run_chunk(c);
        }
    } else {
        std::atomic<std::int64_t> next{0};
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) {
            workers.emplace_back([&] {
                for (std::int64_t c = next.fetch_add(1); c < n_chunks;
                     c = next.fetch_add(1)) {
                    run_chunk(c);
                }
            });
        }
        for (auto& w : workers) {
            w.join();
        }
    }

    // Chunk partials are combined in index order, so the estimate does not
    // depend on how chunks were scheduled across threads.
    Accum total;
    for (const Accum& a : accums) {
        total.combine(a);
    }

    McEstimate est;
    est.n_paths = n;
    est.mean = total.sum / static_cast<double>(n);
    est.std_error = std_error_of(total.sum, total.sumsq, n);
    est.upper_exit_fraction = static_cast<double>(total.n_upper) / static_cast<double>(n);
    est.lower_exit_fraction = static_cast<double>(total.n_lower) / static_cast<double>(n);
    est.truncated_fraction = static_cast<double>(total.n_trunc) / static_cast<double>(n);
    est.upper_value_min = total.n_upper > 0 ? total.up_min : kNaN;
    est.upper_value_max = total.n_upper > 0 ? total.up_max : kNaN;
    est.lower_value_min = total.n_lower > 0 ? total.lo_min : kNaN;
    est.lower_value_max = total.n_lower > 0 ? total.lo_max : kNaN;
    est.disc_upper_mean = total.up_sum / static_cast<double>(n);
    est.disc_upper_se = std_error_of(total.up_sum, total.up_sumsq, n);
    est.disc_lower_mean = total.lo_sum / static_cast<double>(n);
    est.disc_lower_se = std_error_of(total.lo_sum, total.lo_sumsq, n);
    est.tau_disc_mean = total.tau_sum / static_cast<double>(n);
    est.tau_disc_se = std_error_of(total.tau_sum, total.tau_sumsq, n);
    est.fee_integral_mean = total.fee_sum / static_cast<double>(n);
    est.fee_integral_se = std_error_of(total.fee_sum, total.fee_sumsq, n);
    est.exit_histogram = build_histogram(totals);
    return est;
}

std::vector<ConvergenceRow> convergence_report(const NormalizedPosition& pos,
                                               const MarketParams& market, double p,
                                               const ExerciseStyle& style, FeeMode mode,
                                               const McConfig& cfg,
                                               const std::vector<std::int64_t>& ladder,
                                               std::optional<double> closed_form) {
    if (ladder.empty()) {
        throw std::invalid_argument("ladder must be nonempty");
    }
    for (std::size_t i = 1; i < ladder.size(); ++i) {
        if (ladder[i] <= ladder[i - 1]) {
            throw std::invalid_argument("ladder must be strictly increasing");
        }
    }
    std::vector<ConvergenceRow> rows;
    rows.reserve(ladder.size());
    for (const std::int64_t n : ladder) {
        McConfig rung = cfg;
        rung.paths = n;
        const McEstimate est = mc_price(pos, market, p, style, mode, rung);
        ConvergenceRow row{n, est.mean, est.std_error, kNaN};
        if (closed_form) {
            row.closed_form_gap = std::abs(est.mean - *closed_form);
        }
        rows.push_back(row);
    }
    return rows;
}

void write_histogram_csv(const std::vector<HistogramBin>& bins, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open histogram output file: " + path);
    }
    out << "bin_left,bin_right,count\n";
    char line[128];
    for (const HistogramBin& b : bins) {
        std::snprintf(line, sizeof(line), "%.17g,%.17g,%lld\n", b.lo, b.hi,
                      static_cast<long long>(b.count));
        out << line;
    }
}

}  // namespace rnp
