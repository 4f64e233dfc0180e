#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "doctest.h"
#include "rnp/barrier_laplace.hpp"
#include "rnp/mc_engine.hpp"
#include "rnp/philox.hpp"

using namespace rnp;

namespace {

const NormalizedPosition kPos = make_position(0.8, 1.2);
const MarketParams kFig2{0.0, 0.6, 0.04, 0.2};

McConfig quick_cfg(std::int64_t paths, std::uint64_t seed = 7) {
    McConfig cfg;
    cfg.paths = paths;
    cfg.dt = 1e-3;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_SUITE("mc_engine") {

TEST_CASE("philox4x32-10 reproduces the published known-answer vectors") {
    using Block = Philox4x32::Block;
    using Key = Philox4x32::Key;
    CHECK(Philox4x32::block(Block{0, 0, 0, 0}, Key{0, 0}) ==
          Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(Philox4x32::block(Block{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                            Key{0xffffffffu, 0xffffffffu}) ==
          Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(Philox4x32::block(Block{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                            Key{0xa4093822u, 0x299f31d0u}) ==
          Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("estimates are bit-identical across worker counts and reruns") {
    McConfig one = quick_cfg(20000);
    one.threads = 1;
    McConfig many = quick_cfg(20000);
    many.threads = 4;

    const McEstimate a = mc_price(kPos, kFig2, 1.0, European{}, FeeMode::AtClose, one);
    const McEstimate b = mc_price(kPos, kFig2, 1.0, European{}, FeeMode::AtClose, many);
    const McEstimate c = mc_price(kPos, kFig2, 1.0, European{}, FeeMode::AtClose, many);

    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
    CHECK(a.upper_exit_fraction == b.upper_exit_fraction);
    CHECK(a.tau_disc_mean == b.tau_disc_mean);
    CHECK(b.mean == c.mean);
    REQUIRE(a.exit_histogram.size() == b.exit_histogram.size());
    for (std::size_t i = 0; i < a.exit_histogram.size(); ++i) {
        CHECK(a.exit_histogram[i].count == b.exit_histogram[i].count);
    }
    // Different seeds genuinely move the estimate.
    const McEstimate d =
        mc_price(kPos, kFig2, 1.0, European{}, FeeMode::AtClose, quick_cfg(20000, 8));
    CHECK(d.mean != a.mean);
}

TEST_CASE("deterministic drift limit") {
    MarketParams m{0.5, 1e-8, 0.0, 0.2};
    McConfig cfg;
    cfg.paths = 200;
    cfg.dt = 1e-4;
    cfg.seed = 3;
    const McEstimate est = mc_price(kPos, m, 1.0, European{}, FeeMode::AtClose, cfg);
    CHECK(est.upper_exit_fraction == 1.0);
    CHECK(est.std_error == doctest::Approx(0.0).epsilon(1e-12));
    // Exit happens on the first step whose cumulative drift reaches ln(h).
    const double drift = (m.mu - 0.5 * m.sigma * m.sigma) * cfg.dt;
    const double tau = cfg.dt * std::ceil(std::log(kPos.h) / drift);
    const double expected = lp_payoff_v3(kPos.h, kPos) + m.fee_annual * kPos.lq * tau;
    CHECK(est.mean == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("exit fractions match the driftless ruin probabilities") {
    MarketParams m{0.18, 0.6, 0.0, 0.0};  // mu' = 0, r = 0
    const McEstimate est =
        mc_price(kPos, m, 1.0, European{}, FeeMode::AtClose, quick_cfg(20000));
    const LogCoords c = log_coords(1.0, kPos, m);
    const double p_up = c.a_prime / c.span();
    const double se = 3.0 * std::sqrt(p_up * (1.0 - p_up) / 20000.0);
    CHECK(std::abs(est.upper_exit_fraction - p_up) < se);
    CHECK(std::abs(est.upper_exit_fraction + est.lower_exit_fraction +
                   est.truncated_fraction - 1.0) < 1e-12);
}

TEST_CASE("component estimators agree with the closed forms") {
    const McEstimate est =
        mc_price(kPos, kFig2, 1.0, European{}, FeeMode::AtClose, quick_cfg(20000));
    const TransformInputs inp{log_coords(1.0, kPos, kFig2), kFig2.r};

    CHECK(std::abs(est.disc_upper_mean - hit_upper_factor(inp)) <
          3.0 * est.disc_upper_se);
    CHECK(std::abs(est.disc_lower_mean - hit_lower_factor(inp)) <
          3.0 * est.disc_lower_se);
    CHECK(std::abs(est.tau_disc_mean - expected_discounted_tau(inp)) <
          3.0 * est.tau_disc_se);
    const double fee_integral = (1.0 - survival_transform(inp)) / kFig2.r;
    CHECK(std::abs(est.fee_integral_mean - fee_integral) < 3.0 * est.fee_integral_se);
}

TEST_CASE("mean matches the European closed form for both modes and fee levels") {
    for (const double fee : {0.0, 0.2}) {
        MarketParams m = kFig2;
        m.fee_annual = fee;
        for (const FeeMode mode : {FeeMode::AtClose, FeeMode::Continuous}) {
            const McEstimate est =
                mc_price(kPos, m, 1.0, European{}, mode, quick_cfg(20000));
            const double closed = price_european(kPos, m, 1.0, mode).pv;
            CHECK(std::abs(est.mean - closed) < 3.0 * est.std_error);
        }
    }
}

TEST_CASE("fixed-boundary American estimate matches its closed form") {
    const McEstimate est = mc_price(kPos, kFig2, 1.0, American{0.85, 1.1},
                                    FeeMode::Continuous, quick_cfg(20000));
    const double closed =
        price_american_at(kPos, kFig2, 1.0, 0.85, 1.1, FeeMode::Continuous).pv;
    CHECK(std::abs(est.mean - closed) < 3.0 * est.std_error);
}

TEST_CASE("histogram is bimodal with disjoint cluster supports") {
    MarketParams m = kFig2;
    m.fee_annual = 0.0;
    const McEstimate est =
        mc_price(kPos, m, 1.0, European{}, FeeMode::AtClose, quick_cfg(20000));
    CHECK(est.truncated_fraction == 0.0);
    CHECK(est.upper_value_min > est.lower_value_max);
    std::int64_t mass = 0;
    for (const HistogramBin& b : est.exit_histogram) {
        mass += b.count;
    }
    CHECK(mass == est.n_paths);
    // Bins strictly between the cluster supports are empty.
    for (const HistogramBin& b : est.exit_histogram) {
        if (b.lo > est.lower_value_max && b.hi < est.upper_value_min) {
            CHECK(b.count == 0);
        }
    }
}

TEST_CASE("bridge correction removes the positive tau bias visible at coarse dt") {
    MarketParams m{0.0, 0.6, 0.0, 0.0};  // r = 0 makes tau_disc_mean = E[tau]
    McConfig coarse = quick_cfg(20000);
    coarse.dt = 1e-2;
    McConfig off = coarse;
    off.bridge_correction = false;
    const McEstimate with_bridge =
        mc_price(kPos, m, 1.0, European{}, FeeMode::AtClose, coarse);
    const McEstimate without =
        mc_price(kPos, m, 1.0, European{}, FeeMode::AtClose, off);
    const double se = std::hypot(with_bridge.tau_disc_se, without.tau_disc_se);
    CHECK(without.tau_disc_mean - with_bridge.tau_disc_mean > 3.0 * se);
}

TEST_CASE("truncation contribution is bounded under the default horizon") {
    const McEstimate est =
        mc_price(kPos, kFig2, 1.0, European{}, FeeMode::AtClose, quick_cfg(20000));
    const double bound = est.truncated_fraction * payoff_cap(kPos) *
                         std::exp(-kFig2.r * 100.0);
    CHECK(bound < 1e-4 * est.mean);
}

TEST_CASE("convergence ladder scales like 1/sqrt(paths)") {
    MarketParams m = kFig2;
    m.fee_annual = 0.0;
    const double closed = price_european(kPos, m, 1.0, FeeMode::AtClose).pv;
    const auto rows = convergence_report(kPos, m, 1.0, European{}, FeeMode::AtClose,
                                         quick_cfg(1), {1000, 4000, 16000}, closed);
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].closed_form_gap < 3.0 * rows[i].std_error);
        if (i > 0) {
            const double ratio = rows[i].std_error / rows[i - 1].std_error;
            CHECK(ratio > 0.35);
            CHECK(ratio < 0.65);
        }
    }
}

TEST_CASE("histogram CSV has the documented header and full mass") {
    const McEstimate est =
        mc_price(kPos, kFig2, 1.0, European{}, FeeMode::AtClose, quick_cfg(2000));
    const std::string path = "mc_hist_test.csv";
    write_histogram_csv(est.exit_histogram, path);
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(header == "bin_left,bin_right,count");
    std::int64_t mass = 0;
    std::string line;
    while (std::getline(in, line)) {
        double lo, hi;
        long long count;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lld", &lo, &hi, &count) == 3);
        mass += count;
    }
    CHECK(mass == est.n_paths);
    std::remove(path.c_str());
}

TEST_CASE("config and precondition errors") {
    McConfig bad = quick_cfg(0);
    CHECK_THROWS_AS(static_cast<void>(mc_price(kPos, kFig2, 1.0, European{}, FeeMode::AtClose, bad)),
                    std::invalid_argument);
    bad = quick_cfg(10);
    bad.dt = 0.0;
    CHECK_THROWS_AS(static_cast<void>(mc_price(kPos, kFig2, 1.0, European{}, FeeMode::AtClose, bad)),
                    std::invalid_argument);
    bad = quick_cfg(10);
    bad.dt = 0.5;
    CHECK_THROWS_AS(static_cast<void>(mc_price(kPos, kFig2, 1.0, European{}, FeeMode::AtClose, bad)),
                    std::invalid_argument);

    CHECK_THROWS_AS(static_cast<void>(mc_price(kPos, kFig2, 1.3, European{}, FeeMode::AtClose, quick_cfg(10))),
        std::domain_error);
    CHECK_THROWS_AS(static_cast<void>(mc_price(kPos, kFig2, 1.0, American{0.7, 1.1}, FeeMode::AtClose,
                             quick_cfg(10))),
                    std::domain_error);

    CHECK_THROWS_AS(static_cast<void>(convergence_report(kPos, kFig2, 1.0, European{}, FeeMode::AtClose,
                                       quick_cfg(10), {})),
                    std::invalid_argument);
    CHECK_THROWS_AS(static_cast<void>(convergence_report(kPos, kFig2, 1.0, European{}, FeeMode::AtClose,
                                       quick_cfg(10), {100, 100})),
                    std::invalid_argument);
}

}  // TEST_SUITE
