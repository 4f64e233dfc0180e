// Command-line surface for the range-position pricing toolkit: closed-form
// pricing, Greeks, Monte Carlo validation, figure-data sweeps, implied
// volatility, and historical position ingestion.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "rnp/errors.hpp"
#include "rnp/greeks.hpp"
#include "rnp/iv_analytics.hpp"
#include "rnp/mc_engine.hpp"
#include "rnp/model_core.hpp"
#include "rnp/pricer.hpp"

namespace {

using nlohmann::json;
using namespace rnp;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNoRoot = 3;
constexpr int kExitNumerical = 4;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// Market/position flags shared by the pricing subcommands.
struct MarketFlags {
    double spot = 1.0;
    double lower = 0.0;
    double upper = 0.0;
    double sigma = 0.0;
    double r = 0.0;
    double fee_apr = 0.0;
    double mu = 0.0;
    double s0 = 1.0;
    std::string style = "euro";
    std::string fee_mode = "at-close";

    std::vector<CLI::Option*> required_opts;

    // Required flags are enforced after the optional config merge, so a
    // config file can stand in for any of them.
    void add_to(CLI::App* cmd, bool need_sigma) {
        required_opts.push_back(cmd->add_option("--spot", spot, "spot price (quote units)"));
        required_opts.push_back(cmd->add_option("--lower", lower, "lower range bound"));
        required_opts.push_back(cmd->add_option("--upper", upper, "upper range bound"));
        if (need_sigma) {
            required_opts.push_back(
                cmd->add_option("--sigma", sigma, "annualized volatility"));
        }
        required_opts.push_back(cmd->add_option("--r", r, "risk-free rate (1/year)"));
        required_opts.push_back(
            cmd->add_option("--fee-apr", fee_apr, "annual fee rate on position value"));
        cmd->add_option("--mu", mu, "annualized drift (default 0)");
        cmd->add_option("--s0", s0, "inception price (default 1)");
        cmd->add_option("--style", style, "euro|amer")
            ->check(CLI::IsMember({"euro", "amer"}));
        cmd->add_option("--fee-mode", fee_mode, "continuous|at-close")
            ->check(CLI::IsMember({"continuous", "at-close"}));
    }

    void check_required() const {
        for (const CLI::Option* opt : required_opts) {
            if (opt->count() == 0) {
                throw CLI::ValidationError(opt->get_name() + " is required");
            }
        }
    }

    // The position must straddle its inception price; the spot itself may sit
    // outside the range (stopped valuation). Messages name the offending flag,
    // using "spot" when s0 was left at its default and coincides with it.
    void validate_ordering() const {
        if (!(s0 > 0.0)) {
            throw CLI::ValidationError("s0 must be > 0");
        }
        if (!(spot > 0.0)) {
            throw CLI::ValidationError("spot must be > 0");
        }
        if (!(lower > 0.0)) {
            throw CLI::ValidationError("lower must be > 0");
        }
        const char* anchor = (s0 == spot) ? "spot" : "s0";
        if (!(lower < s0)) {
            throw CLI::ValidationError(std::string("lower must be < ") + anchor);
        }
        if (!(s0 < upper)) {
            throw CLI::ValidationError(std::string(anchor) + " must be < upper");
        }
    }

    [[nodiscard]] MarketParams market() const { return {mu, sigma, r, fee_apr}; }
    [[nodiscard]] NormalizedPosition position() const {
        return normalize_position({s0, lower, upper});
    }
    [[nodiscard]] double unit_spot() const { return spot / s0; }
    [[nodiscard]] FeeMode mode() const {
        return fee_mode == "continuous" ? FeeMode::Continuous : FeeMode::AtClose;
    }
    [[nodiscard]] bool american() const { return style == "amer"; }
};

// Optional JSON config: same keys as the long flags; explicit flags win.
// Applied by rewriting argv defaults before CLI11 parses.
void apply_config_defaults(CLI::App* cmd, const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw CLI::ValidationError("config file not found: " + path);
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw CLI::ValidationError(std::string("config parse error: ") + e.what());
    }
    for (const auto& [key, value] : doc.items()) {
        CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (opt == nullptr) {
            throw CLI::ValidationError("config key has no matching flag: " + key);
        }
        if (!opt->results().empty()) {
            continue;  // flag given on the command line wins
        }
        const std::string text =
            value.is_string() ? value.get<std::string>() : value.dump();
        opt->add_result(text);
        opt->run_callback();
    }
}

std::uint64_t seed_fallback(std::uint64_t flag_value, bool flag_given) {
    if (flag_given) {
        return flag_value;
    }
    if (const char* env = std::getenv("RNP_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return flag_value;
}

PricingResult run_pricer(const MarketFlags& mf, const OptimizerConfig& opt) {
    if (mf.american()) {
        return price_american(mf.position(), mf.market(), mf.unit_spot(), mf.mode(), opt);
    }
    return price_european(mf.position(), mf.market(), mf.unit_spot(), mf.mode());
}

int cmd_price(const MarketFlags& mf, bool as_json) {
    mf.check_required();
    mf.validate_ordering();
    OptimizerConfig opt;
    const PricingResult res = run_pricer(mf, opt);
    const American* am = std::get_if<American>(&res.style);
    if (as_json) {
        json out{{"pv", res.pv},
                 {"lp_leg", res.lp_leg},
                 {"fee_leg", res.fee_leg},
                 {"stopped", res.stopped},
                 {"style", mf.style},
                 {"fee_mode", mf.fee_mode}};
        if (am != nullptr) {
            out["l1"] = am->l1;
            out["l2"] = am->l2;
        }
        std::cout << out.dump() << "\n";
    } else {
        std::cout << "pv " << fmt(res.pv) << "\n";
        std::cout << "lp_leg " << fmt(res.lp_leg) << "\n";
        std::cout << "fee_leg " << fmt(res.fee_leg) << "\n";
        std::cout << "stopped " << (res.stopped ? "true" : "false") << "\n";
        if (am != nullptr) {
            std::cout << "l1 " << fmt(am->l1) << "\n";
            std::cout << "l2 " << fmt(am->l2) << "\n";
        }
    }
    return kExitOk;
}

int cmd_greeks(const MarketFlags& mf, const std::string& csv_path) {
    mf.check_required();
    mf.validate_ordering();
    const auto rows =
        greeks_table({{"market", mf.market()}}, mf.position(), mf.unit_spot(), mf.mode());
    std::cout << render_greeks_table(rows);
    write_greeks_csv(rows, csv_path);
    return kExitOk;
}

int cmd_mc(const MarketFlags& mf, McConfig cfg, const std::string& histogram_path,
           bool as_json) {
    mf.check_required();
    mf.validate_ordering();
    const NormalizedPosition pos = mf.position();
    const MarketParams market = mf.market();
    const double p = mf.unit_spot();

    ExerciseStyle style{European{}};
    double closed = 0.0;
    if (mf.american()) {
        const PricingResult res = price_american(pos, market, p, mf.mode());
        style = res.style;
        closed = res.pv;
    } else {
        closed = price_european(pos, market, p, mf.mode()).pv;
    }

    const McEstimate est = mc_price(pos, market, p, style, mf.mode(), cfg);
    const double gap = std::abs(est.mean - closed);
    if (!histogram_path.empty()) {
        write_histogram_csv(est.exit_histogram, histogram_path);
    }
    if (as_json) {
        json out{{"mean", est.mean},
                 {"std_error", est.std_error},
                 {"closed_form", closed},
                 {"abs_gap", gap},
                 {"paths", est.n_paths},
                 {"upper_exit_fraction", est.upper_exit_fraction},
                 {"lower_exit_fraction", est.lower_exit_fraction},
                 {"truncated_fraction", est.truncated_fraction}};
        std::cout << out.dump() << "\n";
    } else {
        std::cout << "mean " << fmt(est.mean) << "\n";
        std::cout << "std_error " << fmt(est.std_error) << "\n";
        std::cout << "closed_form " << fmt(closed) << "\n";
        std::cout << "abs_gap " << fmt(gap) << "\n";
        std::cout << "paths " << est.n_paths << "\n";
        std::cout << "upper_exit_fraction " << fmt(est.upper_exit_fraction) << "\n";
        std::cout << "lower_exit_fraction " << fmt(est.lower_exit_fraction) << "\n";
        std::cout << "truncated_fraction " << fmt(est.truncated_fraction) << "\n";
    }
    return kExitOk;
}

struct SweepFlags {
    std::string param = "spot";
    double from = 0.0;
    double to = 0.0;
    int steps = 0;
    std::string models = "payoff,euro,amer";
    std::string fee_modes;
    std::string out;
};

std::vector<std::string> split_csv_list(const std::string& text) {
    std::vector<std::string> items;
    std::string cur;
    for (const char ch : text) {
        if (ch == ',') {
            if (!cur.empty()) {
                items.push_back(cur);
            }
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) {
        items.push_back(cur);
    }
    return items;
}

int cmd_sweep(MarketFlags mf, const SweepFlags& sf) {
    mf.check_required();
    if (sf.steps < 1) {
        throw CLI::ValidationError("steps must be >= 1");
    }
    if (!(sf.from <= sf.to)) {
        throw CLI::ValidationError("from must be <= to");
    }
    const std::vector<std::string> models = split_csv_list(sf.models);
    if (models.empty()) {
        throw CLI::ValidationError("models must name at least one of payoff,euro,amer");
    }
    for (const std::string& m : models) {
        if (m != "payoff" && m != "euro" && m != "amer") {
            throw CLI::ValidationError("unknown model: " + m);
        }
    }
    std::vector<std::string> modes = split_csv_list(
        sf.fee_modes.empty() ? mf.fee_mode : sf.fee_modes);
    for (const std::string& m : modes) {
        if (m != "continuous" && m != "at-close") {
            throw CLI::ValidationError("unknown fee mode: " + m);
        }
    }

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!sf.out.empty()) {
        file.open(sf.out);
        if (!file) {
            throw CLI::ValidationError("cannot open output file: " + sf.out);
        }
        out = &file;
    }

    *out << "param_value,model,fee_mode,pv,delta,gamma,vega,rho\n";
    for (int i = 0; i < sf.steps; ++i) {
        const double value =
            sf.steps == 1 ? sf.from
                          : sf.from + (sf.to - sf.from) * i / (sf.steps - 1);
        MarketFlags point = mf;
        if (sf.param == "spot") {
            point.spot = value;
        } else if (sf.param == "sigma") {
            point.sigma = value;
        } else {  // range-upper
            point.upper = value;
        }
        point.validate_ordering();
        const NormalizedPosition pos = point.position();
        const MarketParams market = point.market();
        const double p = point.unit_spot();

        for (const std::string& model : models) {
            if (model == "payoff") {
                const GreeksReport g = payoff_greeks(p, pos);
                *out << fmt(value) << ",payoff,-," << fmt(g.pv) << "," << fmt(g.delta)
                     << "," << fmt(g.gamma) << "," << fmt(g.vega) << "," << fmt(g.rho)
                     << "\n";
                continue;
            }
            for (const std::string& mode_name : modes) {
                const FeeMode mode =
                    mode_name == "continuous" ? FeeMode::Continuous : FeeMode::AtClose;
                PricingModel fn;
                if (model == "euro") {
                    fn = [&pos, &market, mode](double pp, double ss, double rr) {
                        MarketParams m = market;
                        m.sigma = ss;
                        m.r = rr;
                        return price_european(pos, m, pp, mode).pv;
                    };
                } else {
                    fn = [&pos, &market, mode](double pp, double ss, double rr) {
                        MarketParams m = market;
                        m.sigma = ss;
                        m.r = rr;
                        return price_american(pos, m, pp, mode).pv;
                    };
                }
                const GreeksReport g =
                    fd_greeks(fn, p, market.sigma, market.r, {}, pos.l, pos.h);
                *out << fmt(value) << "," << model << "," << mode_name << ","
                     << fmt(g.pv) << "," << fmt(g.delta) << "," << fmt(g.gamma) << ","
                     << fmt(g.vega) << "," << fmt(g.rho) << "\n";
            }
        }
    }
    return kExitOk;
}

int cmd_iv(const MarketFlags& mf, double target_pv, double sigma_lo, double sigma_hi) {
    mf.check_required();
    mf.validate_ordering();
    IvSolverConfig cfg;
    cfg.mu = mf.mu;
    cfg.r = mf.r;
    cfg.fee_annual = mf.fee_apr;
    cfg.mode = mf.mode();
    cfg.style = mf.american() ? ExerciseStyle{American{}} : ExerciseStyle{European{}};
    cfg.bracket_lo = sigma_lo;
    cfg.bracket_hi = sigma_hi;
    cfg.target_pv = target_pv;
    const IvSolveResult res = break_even_iv(mf.position(), mf.unit_spot(), cfg);
    std::cout << "sigma " << fmt(res.sigma) << "\n";
    std::cout << "multiple_roots " << (res.multiple_roots ? "true" : "false") << "\n";
    std::cout << "scan_sign_changes " << res.scan_sign_changes << "\n";
    return kExitOk;
}

int cmd_ingest(const std::string& positions_path, const std::string& bucket_name,
               double r, double mu, const std::string& fee_mode_name, double target_pv,
               const std::string& out_path) {
    IngestResult ingest;
    try {
        ingest = ingest_positions(positions_path);
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    for (const std::string& err : ingest.row_errors) {
        std::cerr << "rejected " << err << "\n";
    }
    IvSolverConfig cfg;
    cfg.mu = mu;
    cfg.r = r;
    cfg.mode = fee_mode_name == "continuous" ? FeeMode::Continuous : FeeMode::AtClose;
    cfg.target_pv = target_pv;
    const Bucket bucket = bucket_name == "hourly" ? Bucket::Hourly : Bucket::Daily;
    const auto points = weighted_iv_series(ingest.records, bucket, cfg);
    write_iv_series_csv(points, out_path);
    std::cout << "records " << ingest.records.size() << "\n";
    std::cout << "rejected " << ingest.row_errors.size() << "\n";
    std::cout << "buckets " << points.size() << "\n";
    std::cout << "out " << out_path << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pricing and risk toolkit for concentrated-liquidity range positions"};
    app.require_subcommand(1);

    MarketFlags mf_price, mf_greeks, mf_mc, mf_sweep, mf_iv;
    std::string config_path;
    bool price_json = false, mc_json = false;
    std::string greeks_csv = "greeks.csv";

    CLI::App* price = app.add_subcommand("price", "closed-form present value");
    mf_price.add_to(price, true);
    price->add_flag("--json", price_json, "emit a single JSON object");
    price->add_option("--config", config_path, "JSON config file (flags win)");

    CLI::App* greeks = app.add_subcommand("greeks", "payoff/European/American greeks");
    mf_greeks.add_to(greeks, true);
    greeks->add_option("--csv", greeks_csv, "CSV output path (default greeks.csv)");
    greeks->add_option("--config", config_path, "JSON config file (flags win)");

    CLI::App* mc = app.add_subcommand("mc", "Monte Carlo first-passage validation");
    mf_mc.add_to(mc, true);
    McConfig mc_cfg;
    std::string histogram_path;
    bool no_bridge = false;
    CLI::Option* seed_opt = mc->add_option("--seed", mc_cfg.seed, "RNG seed");
    mc->add_option("--paths", mc_cfg.paths, "number of paths");
    mc->add_option("--dt", mc_cfg.dt, "years per step");
    mc->add_option("--t-max", mc_cfg.t_max, "horizon cap in years");
    mc->add_option("--threads", mc_cfg.threads, "worker threads (0 = hardware)");
    mc->add_flag("--no-bridge", no_bridge, "disable the Brownian-bridge crossing test");
    mc->add_option("--histogram", histogram_path, "write exit histogram CSV here");
    mc->add_flag("--json", mc_json, "emit a single JSON object");
    mc->add_option("--config", config_path, "JSON config file (flags win)");

    CLI::App* sweep = app.add_subcommand("sweep", "grid sweeps emitting figure data");
    mf_sweep.add_to(sweep, true);
    SweepFlags sf;
    sweep->add_option("--param", sf.param, "spot|sigma|range-upper")
        ->required()
        ->check(CLI::IsMember({"spot", "sigma", "range-upper"}));
    sweep->add_option("--from", sf.from, "grid start")->required();
    sweep->add_option("--to", sf.to, "grid end")->required();
    sweep->add_option("--steps", sf.steps, "grid points")->required();
    sweep->add_option("--models", sf.models, "comma list of payoff,euro,amer");
    sweep->add_option("--fee-modes", sf.fee_modes,
                      "comma list of continuous,at-close (default --fee-mode)");
    sweep->add_option("--out", sf.out, "CSV output file (default stdout)");
    sweep->add_option("--config", config_path, "JSON config file (flags win)");

    CLI::App* iv = app.add_subcommand("iv", "break-even implied volatility");
    mf_iv.add_to(iv, false);
    double target_pv = 1.0, sigma_lo = 1e-3, sigma_hi = 10.0;
    iv->add_option("--target-pv", target_pv, "present value to invert for (default 1)");
    iv->add_option("--sigma-lo", sigma_lo, "bracket lower end");
    iv->add_option("--sigma-hi", sigma_hi, "bracket upper end");
    iv->add_option("--config", config_path, "JSON config file (flags win)");

    CLI::App* ingest = app.add_subcommand("ingest", "historical positions -> IV series");
    std::string positions_path, bucket_name = "daily", out_path = "iv_series.csv";
    std::string ingest_fee_mode = "at-close";
    double ingest_r = 0.0, ingest_mu = 0.0, ingest_target = 1.0;
    ingest->add_option("--positions", positions_path, "positions.csv input")->required();
    ingest->add_option("--bucket", bucket_name, "daily|hourly")
        ->check(CLI::IsMember({"daily", "hourly"}));
    ingest->add_option("--r", ingest_r, "risk-free rate for the solves")->required();
    ingest->add_option("--mu", ingest_mu, "drift for the solves (default 0)");
    ingest->add_option("--fee-mode", ingest_fee_mode, "continuous|at-close")
        ->check(CLI::IsMember({"continuous", "at-close"}));
    ingest->add_option("--target-pv", ingest_target, "break-even target (default 1)");
    ingest->add_option("--out", out_path, "output CSV (default iv_series.csv)");

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e);
        }

        for (CLI::App* cmd : {price, greeks, mc, sweep, iv}) {
            if (cmd->parsed() && !config_path.empty()) {
                apply_config_defaults(cmd, config_path);
            }
        }

        if (price->parsed()) {
            return cmd_price(mf_price, price_json);
        }
        if (greeks->parsed()) {
            return cmd_greeks(mf_greeks, greeks_csv);
        }
        if (mc->parsed()) {
            mc_cfg.bridge_correction = !no_bridge;
            mc_cfg.seed = seed_fallback(mc_cfg.seed, seed_opt->count() > 0);
            return cmd_mc(mf_mc, mc_cfg, histogram_path, mc_json);
        }
        if (sweep->parsed()) {
            return cmd_sweep(mf_sweep, sf);
        }
        if (iv->parsed()) {
            return cmd_iv(mf_iv, target_pv, sigma_lo, sigma_hi);
        }
        if (ingest->parsed()) {
            return cmd_ingest(positions_path, bucket_name, ingest_r, ingest_mu,
                              ingest_fee_mode, ingest_target, out_path);
        }
        return kExitValidation;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() != 0) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitValidation;
        }
        return app.exit(e);
    } catch (const NoRootError& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::cerr << "value_at_sigma_lo " << fmt(e.f_lo()) << "\n";
        std::cerr << "value_at_sigma_hi " << fmt(e.f_hi()) << "\n";
        return kExitNoRoot;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
