#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace rnp {

/// Philox4x32-10 counter-based generator. Each (key, counter) pair maps to
/// an independent 128-bit block, so per-path substreams keyed by
/// (seed, path_index) are reproducible under any parallel schedule.
struct Philox4x32 {
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr std::uint32_t kMult0 = 0xD2511F53u;
    static constexpr std::uint32_t kMult1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    [[nodiscard]] static Block block(Block ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMult0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMult1) * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                   static_cast<std::uint32_t>(p0)};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }
};

/// Counter-based draws for one simulated path: every step consumes one
/// Philox block keyed by (seed, path, step). Stateless by construction.
class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t path) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          path_(path) {}

    struct StepDraw {
        double normal;   // standard normal
        double uniform;  // uniform in (0, 1)
    };

    /// One normal plus one auxiliary uniform for the given step index.
    [[nodiscard]] StepDraw step(std::uint64_t step_index) const noexcept {
        const Philox4x32::Block ctr{
            static_cast<std::uint32_t>(step_index),
            static_cast<std::uint32_t>(step_index >> 32),
            static_cast<std::uint32_t>(path_),
            static_cast<std::uint32_t>(path_ >> 32)};
        const Philox4x32::Block out = Philox4x32::block(ctr, key_);
        const double u1 = to_unit(out[0]);
        const double u2 = to_unit(out[1]);
        // Box-Muller; u1 is bounded away from 0 by construction.
        const double z = std::sqrt(-2.0 * std::log(u1)) *
                         std::cos(2.0 * std::numbers::pi * u2);
        return {z, to_unit(out[2])};
    }

private:
    // Maps a 32-bit word to (0, 1), never returning an endpoint.
    [[nodiscard]] static double to_unit(std::uint32_t w) noexcept {
        return (static_cast<double>(w) + 0.5) * 0x1.0p-32;
    }

    Philox4x32::Key key_;
    std::uint64_t path_;
};

}  // namespace rnp
