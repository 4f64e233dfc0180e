#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rnp/model_core.hpp"
#include "rnp/pricer.hpp"

namespace rnp {

/// One historical range position: quote-per-base price bounds and spot at
/// observation time, the annualized fee rate earned on position value, and
/// the position value used as the aggregation weight.
struct PositionRecord {
    std::int64_t timestamp = 0;  // unix seconds, UTC
    std::string pool_id;
    double lower_price = 0.0;
    double upper_price = 0.0;
    double spot_price = 0.0;
    double fee_apr = 0.0;
    double weight = 0.0;
};

/// Cross-sectional implied-volatility point for one time bucket. When no
/// record in the bucket produced a root, n_positions is 0 and the IV fields
/// are NaN.
struct IvPoint {
    std::int64_t bucket_start = 0;  // unix seconds, UTC
    int n_positions = 0;            // records that produced a root
    int n_failed = 0;               // records with no root, excluded
    double weighted_iv = 0.0;
    double lvr_iv = 0.0;
    double mean_fee_apr = 0.0;      // weight-averaged
};

struct IvSolveResult {
    double sigma = 0.0;
    bool multiple_roots = false;
    int scan_sign_changes = 0;
};

/// Everything break_even_iv needs besides sigma itself.
struct IvSolverConfig {
    double mu = 0.0;
    double r = 0.0;
    double fee_annual = 0.0;
    FeeMode mode = FeeMode::AtClose;
    ExerciseStyle style{European{}};
    double bracket_lo = 1e-3;
    double bracket_hi = 10.0;
    double target_pv = 1.0;
    OptimizerConfig optimizer{};
};

/// Volatility at which the model value equals target_pv. A 64-point
/// log-spaced scan locates sign changes; bisection refines the smallest
/// root to 1e-8 in sigma and in value. Multiple sign changes set
/// multiple_roots. Throws NoRootError (with the bracket-end values) when
/// the scan finds no crossing.
[[nodiscard]] IvSolveResult break_even_iv(const NormalizedPosition& pos, double p,
                                          const IvSolverConfig& cfg);

/// LVR-implied volatility 2*sqrt(fee_rate), from balancing the
/// instantaneous fee take against the loss-versus-rebalancing drain.
[[nodiscard]] double lvr_iv(double fee_rate);

struct IngestResult {
    std::vector<PositionRecord> records;
    std::vector<std::string> row_errors;  // "line N: reason" per rejected row
};

/// Parses positions.csv (header timestamp,pool_id,lower_price,upper_price,
/// spot_price,fee_apr,weight). Invalid rows are rejected with line-numbered
/// diagnostics; throws std::runtime_error if the header is wrong or no row
/// survives.
[[nodiscard]] IngestResult ingest_positions(const std::string& path);

enum class Bucket { Daily, Hourly };

/// Per-bucket weighted break-even IV and weighted LVR IV across records.
/// Per-record solves use the record's own range, spot-normalized position,
/// and fee_apr; solver defaults come from cfg (its fee_annual is ignored).
[[nodiscard]] std::vector<IvPoint> weighted_iv_series(
    const std::vector<PositionRecord>& records, Bucket bucket, const IvSolverConfig& cfg);

/// Writes iv_series.csv: bucket_start,n_positions,weighted_iv,lvr_iv,
/// mean_fee_apr with ISO-8601 UTC timestamps.
void write_iv_series_csv(const std::vector<IvPoint>& points, const std::string& path);

/// ISO-8601 UTC helpers ("2024-06-01T12:00:00Z" <-> unix seconds).
[[nodiscard]] std::int64_t parse_iso8601_utc(const std::string& text);
[[nodiscard]] std::string format_iso8601_utc(std::int64_t unix_seconds);

}  // namespace rnp
