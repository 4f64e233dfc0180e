// Acceptance suite: one criterion per section, one PASS/FAIL line each.
// Exit code is the number of failed criteria.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rnp/barrier_laplace.hpp"
#include "rnp/greeks.hpp"
#include "rnp/iv_analytics.hpp"
#include "rnp/mc_engine.hpp"
#include "rnp/model_core.hpp"
#include "rnp/pricer.hpp"

using namespace rnp;

namespace {

int g_failures = 0;

class Criterion {
public:
    Criterion(std::string name, double budget_seconds)
        : name_(std::move(name)),
          budget_(budget_seconds),
          start_(std::chrono::steady_clock::now()) {}

    void expect(bool ok, const std::string& what) {
        if (!ok) {
            issues_.push_back(what);
        }
    }

    void finish() {
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
                .count();
        if (elapsed > budget_) {
            issues_.push_back("runtime " + std::to_string(elapsed) + " s exceeds " +
                              std::to_string(budget_) + " s budget");
        }
        if (issues_.empty()) {
            std::printf("[PASS] %s (%.2f s)\n", name_.c_str(), elapsed);
        } else {
            ++g_failures;
            std::printf("[FAIL] %s (%.2f s)\n", name_.c_str(), elapsed);
            for (const std::string& issue : issues_) {
                std::printf("       - %s\n", issue.c_str());
            }
        }
    }

private:
    std::string name_;
    double budget_;
    std::chrono::steady_clock::time_point start_;
    std::vector<std::string> issues_;
};

LogCoords coords_of(double a_prime, double b_prime, double mu_prime) {
    LogCoords c;
    c.x = 0.0;
    c.a = -a_prime;
    c.b = b_prime;
    c.a_prime = a_prime;
    c.b_prime = b_prime;
    c.mu_prime = mu_prime;
    return c;
}

const NormalizedPosition kPos = make_position(0.8, 1.2);
const MarketParams kFig2{0.0, 0.6, 0.04, 0.2};
const MarketParams kTable1{0.0, 0.7, 0.05, 0.2};
const MarketParams kTable2{0.0, 0.4, 0.05, 0.04};

// --- criterion 1 -----------------------------------------------------------

void criterion_1() {
    Criterion c("criterion 1: Laplace identities F(0)=1 and up+low=F (1e-12, 1000 draws)",
                1.0);
    std::mt19937 rng(101);
    std::uniform_real_distribution<double> width(0.05, 3.0);
    std::uniform_real_distribution<double> drift(-2.0, 2.0);
    std::uniform_real_distribution<double> rate(0.0, 0.5);
    for (int i = 0; i < 1000; ++i) {
        const LogCoords coords = coords_of(width(rng), width(rng), drift(rng));
        const double r = rate(rng);
        const double f0 = survival_transform({coords, 0.0});
        if (std::abs(f0 - 1.0) >= 1e-12) {
            c.expect(false, "F(0) off by " + std::to_string(f0 - 1.0));
            break;
        }
        const double sum =
            hit_upper_factor({coords, r}) + hit_lower_factor({coords, r});
        const double f = survival_transform({coords, r});
        if (std::abs(sum - f) >= 1e-12) {
            c.expect(false, "factor sum differs from F");
            break;
        }
    }
    c.finish();
}

// --- criterion 2 -----------------------------------------------------------

void criterion_2() {
    Criterion c("criterion 2: classical limits at mu'=0, r=0 (ruin probs, E[tau]=a'b')",
                1.0);
    std::mt19937 rng(202);
    std::uniform_real_distribution<double> width(0.05, 3.0);
    for (int i = 0; i < 200; ++i) {
        const double ap = width(rng);
        const double bp = width(rng);
        const TransformInputs inp{coords_of(ap, bp, 0.0), 0.0};
        const double span = ap + bp;
        c.expect(std::abs(hit_upper_factor(inp) - ap / span) < 1e-10,
                 "upper hit probability differs from a'/(a'+b')");
        c.expect(std::abs(hit_lower_factor(inp) - bp / span) < 1e-10,
                 "lower hit probability differs from b'/(a'+b')");
        const double etau = expected_discounted_tau(inp);
        c.expect(std::abs(etau - ap * bp) < 1e-6 * ap * bp,
                 "-F'(0) differs from a'b' beyond 1e-6 relative");
    }
    c.finish();
}

// --- criterion 3 -----------------------------------------------------------

void criterion_3() {
    Criterion c("criterion 3: Monte Carlo agreement on the Fig. 2 setup (3 SE at 1e5 paths)",
                60.0);
    McConfig cfg;
    cfg.paths = 100000;
    cfg.dt = 1e-4;
    cfg.seed = 7;
    cfg.bridge_correction = true;
    for (const double fee : {0.0, 0.2}) {
        MarketParams market = kFig2;
        market.fee_annual = fee;
        for (const FeeMode mode : {FeeMode::AtClose, FeeMode::Continuous}) {
            const McEstimate est =
                mc_price(kPos, market, 1.0, European{}, mode, cfg);
            const double closed = price_european(kPos, market, 1.0, mode).pv;
            const double gap = std::abs(est.mean - closed);
            std::ostringstream label;
            label << "C=" << fee << (mode == FeeMode::AtClose ? " at-close" : " continuous")
                  << ": gap " << gap << " vs 3se " << 3.0 * est.std_error;
            c.expect(gap < 3.0 * est.std_error, label.str());

            if (fee == 0.0 && mode == FeeMode::AtClose) {
                c.expect(est.truncated_fraction == 0.0, "paths were truncated");
                c.expect(est.upper_value_min > est.lower_value_max,
                         "exit-value clusters overlap");
                bool gap_bins_empty = true;
                for (const HistogramBin& b : est.exit_histogram) {
                    if (b.lo > est.lower_value_max && b.hi < est.upper_value_min &&
                        b.count != 0) {
                        gap_bins_empty = false;
                    }
                }
                c.expect(gap_bins_empty, "histogram has mass between the clusters");
            }
        }
    }
    c.finish();
}

// --- criterion 4 -----------------------------------------------------------

void criterion_4() {
    Criterion c("criterion 4: continuous fee value dominates at-close on a 21x21 grid",
                5.0);
    int violations = 0;
    for (int i = 0; i < 21; ++i) {
        const double sigma = 0.1 + (1.5 - 0.1) * i / 20.0;
        for (int j = 0; j < 21; ++j) {
            const double p = kPos.l + (kPos.h - kPos.l) * (j + 1) / 22.0;
            MarketParams m = kTable1;
            m.sigma = sigma;
            const double cont = price_european(kPos, m, p, FeeMode::Continuous).pv;
            const double close = price_european(kPos, m, p, FeeMode::AtClose).pv;
            if (!(cont >= close)) {
                ++violations;
            }
        }
    }
    c.expect(violations == 0, std::to_string(violations) + " grid violations");
    c.finish();
}

// --- criterion 5 -----------------------------------------------------------

void criterion_5() {
    {
        Criterion c(
            "criterion 5a: American dominance over European and payoff (101-spot grid)",
            30.0);
        for (const MarketParams& market : {kTable1, kTable2}) {
            for (int i = 1; i < 101; ++i) {
                const double p = kPos.l + (kPos.h - kPos.l) * i / 101.0;
                const double amer =
                    price_american(kPos, market, p, FeeMode::AtClose).pv;
                const double euro = price_european(kPos, market, p, FeeMode::AtClose).pv;
                const double payoff = lp_payoff_v3(p, kPos);
                if (!(amer >= euro - 1e-9 && amer >= payoff - 1e-9)) {
                    c.expect(false, "dominance violated at spot " + std::to_string(p));
                    break;
                }
            }
        }
        c.finish();
    }
    {
        Criterion c("criterion 5b: Table II ordering American pv > European pv at spot 1",
                    30.0);
        const double amer = price_american(kPos, kTable2, 1.0, FeeMode::AtClose).pv;
        const double euro = price_european(kPos, kTable2, 1.0, FeeMode::AtClose).pv;
        c.expect(amer > euro, "ordering failed");
        c.finish();
    }
    {
        Criterion c("criterion 5c: Table I ordering American pv > European pv at spot 1",
                    30.0);
        const double amer = price_american(kPos, kTable1, 1.0, FeeMode::AtClose).pv;
        const double euro = price_european(kPos, kTable1, 1.0, FeeMode::AtClose).pv;
        // Known not to reproduce with range (0.8, 1.2): the two-boundary
        // objective is corner-optimal here, so American == European exactly.
        // Kept as stated; see the decisions ledger for the analysis.
        c.expect(amer > euro,
                 "American equals European: holding to the range edge is optimal at "
                 "these parameters (fee accrual C*Lq ~ 1.04/yr vs r = 0.05), so the "
                 "strict printed-table ordering cannot hold at range (0.8, 1.2)");
        c.finish();
    }
}

// --- criterion 6 -----------------------------------------------------------

void criterion_6() {
    Criterion c("criterion 6: Greeks consistency (payoff FD vs analytic, gamma, reruns)",
                10.0);

    PricingModel payoff_model = [](double p, double, double) {
        return lp_payoff_v3(p, kPos);
    };
    for (int i = 0; i < 50; ++i) {
        const double p = 0.45 + 1.2 * i / 49.0;
        if (std::abs(p - kPos.l) < 1e-3 || std::abs(p - kPos.h) < 1e-3) {
            continue;
        }
        const GreeksReport fd = fd_greeks(payoff_model, p, 0.7, 0.05, {}, kPos.l, kPos.h);
        const GreeksReport an = payoff_greeks(p, kPos);
        c.expect(std::abs(fd.delta - an.delta) < 1e-5,
                 "payoff delta mismatch at spot " + std::to_string(p));
        c.expect(std::abs(fd.gamma - an.gamma) < 1e-5,
                 "payoff gamma mismatch at spot " + std::to_string(p));
    }

    PricingModel euro = [](double p, double sigma, double r) {
        MarketParams m{0.0, sigma, r, 0.2};
        return price_european(kPos, m, p, FeeMode::AtClose).pv;
    };
    const BumpConfig bump;
    const double h = bump.h_spot_rel;
    auto delta_at = [&](double x) {
        return (euro(x + h, 0.7, 0.05) - euro(x - h, 0.7, 0.05)) / (2.0 * h);
    };
    const double gamma_from_delta = (delta_at(1.0 + h) - delta_at(1.0 - h)) / (2.0 * h);
    const double gamma_direct =
        fd_greeks(euro, 1.0, 0.7, 0.05, bump, kPos.l, kPos.h).gamma;
    c.expect(std::abs(gamma_direct - gamma_from_delta) <
                 1e-4 * std::abs(gamma_from_delta),
             "European gamma differs from the delta derivative beyond 1e-4 relative");

    PricingModel amer = [](double p, double sigma, double r) {
        MarketParams m{0.0, sigma, r, 0.04};
        return price_american(kPos, m, p, FeeMode::AtClose).pv;
    };
    const GreeksReport run1 = fd_greeks(amer, 1.0, 0.4, 0.05, {}, kPos.l, kPos.h);
    const GreeksReport run2 = fd_greeks(amer, 1.0, 0.4, 0.05, {}, kPos.l, kPos.h);
    c.expect(std::abs(run1.delta - run2.delta) < 1e-6 &&
                 std::abs(run1.gamma - run2.gamma) < 1e-6 &&
                 std::abs(run1.vega - run2.vega) < 1e-6 &&
                 std::abs(run1.rho - run2.rho) < 1e-6,
             "American Greeks differ across reruns");
    c.finish();
}

// --- criterion 7 -----------------------------------------------------------

void criterion_7() {
    Criterion c("criterion 7: IV round-trip (100 draws to 1e-6) and lvr_iv(0.04)=0.4",
                30.0);
    std::mt19937 rng(707);
    std::uniform_real_distribution<double> sig(0.1, 2.0);
    std::uniform_real_distribution<double> rate(0.02, 0.15);
    std::uniform_real_distribution<double> fee(0.05, 0.3);
    for (int i = 0; i < 100; ++i) {
        IvSolverConfig cfg;
        cfg.r = rate(rng);
        // Monotone pricing families keep the inversion single-rooted: heavy
        // continuous fees, or no fees at all.
        if (i % 2 == 0) {
            cfg.mode = FeeMode::Continuous;
            cfg.fee_annual = fee(rng);
        } else {
            cfg.mode = FeeMode::AtClose;
            cfg.fee_annual = 0.0;
        }
        const double sigma0 = sig(rng);
        MarketParams m{0.0, sigma0, cfg.r, cfg.fee_annual};
        cfg.target_pv = price_european(kPos, m, 1.0, cfg.mode).pv;
        const IvSolveResult res = break_even_iv(kPos, 1.0, cfg);
        if (std::abs(res.sigma - sigma0) >= 1e-6) {
            c.expect(false, "draw " + std::to_string(i) + " recovered " +
                                std::to_string(res.sigma) + " instead of " +
                                std::to_string(sigma0));
            break;
        }
    }
    c.expect(lvr_iv(0.04) == 0.4, "lvr_iv(0.04) != 0.4 exactly");
    c.finish();
}

// --- criterion 8 -----------------------------------------------------------

void criterion_8() {
    {
        Criterion c(
            "criterion 8a: sigma sweep with continuous fees non-monotone near 0, "
            "rising as sigma->0",
            10.0);
        std::vector<double> cont, close;
        std::vector<double> grid;
        for (double s = 0.01; s <= 1.5; s *= 1.12) {
            grid.push_back(s);
        }
        for (const double s : grid) {
            MarketParams m = kTable1;
            m.sigma = s;
            cont.push_back(price_european(kPos, m, 1.0, FeeMode::Continuous).pv);
            close.push_back(price_european(kPos, m, 1.0, FeeMode::AtClose).pv);
        }
        c.expect(cont[0] > cont[1], "continuous value does not rise toward sigma->0");
        bool has_rise = false, has_fall = false;
        for (std::size_t i = 1; i < cont.size(); ++i) {
            has_rise = has_rise || cont[i] > cont[i - 1];
            has_fall = has_fall || cont[i] < cont[i - 1];
        }
        // Known not to hold: the continuous curve is strictly decreasing in
        // sigma (the non-monotone curve is the at-close one). Kept as
        // stated; see the decisions ledger.
        c.expect(has_rise && has_fall,
                 "continuous-fee pv is strictly monotone in sigma; the non-monotone "
                 "hump belongs to the at-close (lower-bound) fee value");
        // Diagnostic for the underlying phenomenon the figure describes.
        bool close_rise = false, close_fall = false;
        for (std::size_t i = 1; i < close.size(); ++i) {
            close_rise = close_rise || close[i] > close[i - 1];
            close_fall = close_fall || close[i] < close[i - 1];
        }
        std::printf("       note: at-close sweep non-monotone = %s (rise and fall)\n",
                    close_rise && close_fall ? "yes" : "no");
        c.finish();
    }
    {
        Criterion c("criterion 8b: at sigma=0.02 continuous pv > at-close pv at every spot",
                    10.0);
        MarketParams m = kTable1;
        m.sigma = 0.02;
        for (int j = 0; j < 21; ++j) {
            const double p = kPos.l + (kPos.h - kPos.l) * (j + 1) / 22.0;
            const double cont = price_european(kPos, m, p, FeeMode::Continuous).pv;
            const double close = price_european(kPos, m, p, FeeMode::AtClose).pv;
            if (!(cont > close)) {
                c.expect(false, "violated at spot " + std::to_string(p));
                break;
            }
        }
        c.finish();
    }
    {
        Criterion c("criterion 8c: widening the upper bound raises the European value",
                    10.0);
        double prev = 0.0;
        bool first = true;
        for (const double h : {1.1, 1.2, 1.3}) {
            const NormalizedPosition pos = make_position(0.8, h);
            const double pv = price_european(pos, kTable1, 1.0, FeeMode::AtClose).pv;
            if (!first) {
                c.expect(pv > prev, "pv did not increase at upper bound " +
                                        std::to_string(h));
            }
            prev = pv;
            first = false;
        }
        c.finish();
    }
}

// --- criterion 9 -----------------------------------------------------------

std::string run_cli_stdout(const std::string& args, int& exit_code) {
    const std::string cmd = std::string(RNP_CLI_BIN) + " " + args;
    std::array<char, 4096> buf{};
    std::string output;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) {
        exit_code = -1;
        return output;
    }
    while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe) != nullptr) {
        output += buf.data();
    }
    const int status = pclose(pipe);
    exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return output;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_9() {
    Criterion c("criterion 9: CLI golden files, bit-identical reruns and worker counts",
                60.0);
    const std::string golden_dir = std::string(RNP_SOURCE_DIR) + "/tests/golden/";
    const std::string data = std::string(RNP_SOURCE_DIR) + "/data/positions_sample.csv";

    const std::string price_args =
        "price --spot 1 --lower 0.8 --upper 1.2 --sigma 0.6 --r 0.04 --fee-apr 0.2";
    const std::string mc_args =
        "mc --spot 1 --lower 0.8 --upper 1.2 --sigma 0.6 --r 0.04 --fee-apr 0.2 "
        "--paths 20000 --dt 1e-3 --seed 7";
    const std::string sweep_args =
        "sweep --param spot --from 0.85 --to 1.15 --steps 5 "
        "--models payoff,euro,amer --fee-modes at-close,continuous "
        "--spot 1 --lower 0.8 --upper 1.2 --sigma 0.7 --r 0.05 --fee-apr 0.2";
    const std::string ingest_args = "ingest --positions " + data +
                                    " --bucket daily --r 0.05 --out acc_iv_series.csv";

    int code = 0;

    const std::string price_out = run_cli_stdout(price_args, code);
    c.expect(code == 0, "price exited " + std::to_string(code));
    c.expect(price_out == slurp(golden_dir + "price.golden"), "price output != golden");
    c.expect(price_out == run_cli_stdout(price_args, code), "price rerun differs");

    const std::string mc_out = run_cli_stdout(mc_args + " --threads 1", code);
    c.expect(code == 0, "mc exited " + std::to_string(code));
    c.expect(mc_out == slurp(golden_dir + "mc.golden"), "mc output != golden");
    c.expect(mc_out == run_cli_stdout(mc_args + " --threads 4", code),
             "mc differs across worker counts");
    c.expect(mc_out == run_cli_stdout(mc_args, code), "mc rerun differs");

    const std::string sweep_out = run_cli_stdout(sweep_args, code);
    c.expect(code == 0, "sweep exited " + std::to_string(code));
    c.expect(sweep_out == slurp(golden_dir + "sweep.golden"), "sweep output != golden");
    c.expect(sweep_out == run_cli_stdout(sweep_args, code), "sweep rerun differs");

    const std::string ingest_out = run_cli_stdout(ingest_args, code);
    c.expect(code == 0, "ingest exited " + std::to_string(code));
    c.expect(ingest_out == slurp(golden_dir + "ingest.golden"),
             "ingest stdout != golden");
    const std::string series = slurp("acc_iv_series.csv");
    c.expect(series == slurp(golden_dir + "iv_series.golden"),
             "iv_series.csv != golden");
    run_cli_stdout(ingest_args, code);
    c.expect(slurp("acc_iv_series.csv") == series, "ingest rerun differs");
    std::remove("acc_iv_series.csv");

    c.finish();
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    std::printf("%d criterion(s) failed\n", g_failures);
    return g_failures;
}
