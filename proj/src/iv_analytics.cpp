#include "rnp/iv_analytics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "rnp/errors.hpp"

namespace rnp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kScanPoints = 64;
constexpr double kSigmaTol = 1e-8;
constexpr double kValueTol = 1e-8;

double model_pv(const NormalizedPosition& pos, double p, double sigma,
                const IvSolverConfig& cfg) {
    MarketParams market{cfg.mu, sigma, cfg.r, cfg.fee_annual};
    if (std::holds_alternative<European>(cfg.style)) {
        return price_european(pos, market, p, cfg.mode).pv;
    }
    return price_american(pos, market, p, cfg.mode, cfg.optimizer).pv;
}

// Hinnant's days-from-civil algorithm; exact for the proleptic Gregorian
// calendar, no locale or TZ dependence.
std::int64_t days_from_civil(std::int64_t y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = yy + (m <= 2);
}

}  // namespace

std::int64_t parse_iso8601_utc(const std::string& text) {
    int year = 0, mon = 0, day = 0, hh = 0, mm = 0;
    double ss = 0.0;
    char tz = '\0';
    const int got = std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%lf%c", &year, &mon, &day,
                                &hh, &mm, &ss, &tz);
    if (got < 6 || (got == 7 && tz != 'Z') || mon < 1 || mon > 12 || day < 1 || day > 31 ||
        hh < 0 || hh > 23 || mm < 0 || mm > 59 || ss < 0.0 || ss >= 61.0) {
        throw std::invalid_argument("invalid ISO-8601 UTC timestamp: " + text);
    }
    return days_from_civil(year, mon, day) * 86400 + hh * 3600 + mm * 60 +
           static_cast<std::int64_t>(ss);
}

std::string format_iso8601_utc(std::int64_t unix_seconds) {
    std::int64_t days = unix_seconds / 86400;
    std::int64_t rem = unix_seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    std::int64_t y;
    int m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04lld-%02d-%02dT%02lld:%02lld:%02lldZ",
                  static_cast<long long>(y), m, d, static_cast<long long>(rem / 3600),
                  static_cast<long long>((rem % 3600) / 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

IvSolveResult break_even_iv(const NormalizedPosition& pos, double p,
                            const IvSolverConfig& cfg) {
    if (!(cfg.bracket_lo > 0.0 && cfg.bracket_lo < cfg.bracket_hi)) {
        throw std::invalid_argument("sigma bracket must satisfy 0 < lo < hi");
    }

    auto objective = [&](double sigma) { return model_pv(pos, p, sigma, cfg) - cfg.target_pv; };

    // Log-spaced scan: the bracket typically spans several decades of vol.
    const double log_lo = std::log(cfg.bracket_lo);
    const double log_hi = std::log(cfg.bracket_hi);
    std::array<double, kScanPoints> sig{}, val{};
    for (int i = 0; i < kScanPoints; ++i) {
        const double t = static_cast<double>(i) / (kScanPoints - 1);
        sig[i] = std::exp(log_lo + t * (log_hi - log_lo));
        val[i] = objective(sig[i]);
    }

    int first_change = -1;
    int sign_changes = 0;
    for (int i = 0; i + 1 < kScanPoints; ++i) {
        if (val[i] == 0.0) {
            // Exact hit at a scan point; treat as a root bracket of width 0.
            if (first_change < 0) {
                first_change = i;
            }
            ++sign_changes;
        } else if (val[i] * val[i + 1] < 0.0) {
            if (first_change < 0) {
                first_change = i;
            }
            ++sign_changes;
        }
    }
    if (first_change < 0) {
        throw NoRootError("no sign change of V(sigma) - target on the bracket",
                          val.front() + cfg.target_pv, val.back() + cfg.target_pv);
    }

    double lo = sig[first_change];
    double hi = sig[first_change + 1];
    double f_lo = val[first_change];
    double mid = lo;
    double f_mid = f_lo;
    for (int iter = 0; iter < 200; ++iter) {
        mid = 0.5 * (lo + hi);
        f_mid = objective(mid);
        if (hi - lo < kSigmaTol && std::abs(f_mid) < kValueTol) {
            break;
        }
        if (hi - lo < 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, hi)) {
            break;
        }
        if ((f_lo <= 0.0) == (f_mid <= 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return {mid, sign_changes > 1, sign_changes};
}

double lvr_iv(double fee_rate) {
    if (!(fee_rate >= 0.0)) {
        throw std::domain_error("fee rate must be >= 0");
    }
    return 2.0 * std::sqrt(fee_rate);
}

IngestResult ingest_positions(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open positions file: " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("positions file is empty: " + path);
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    const std::string expected =
        "timestamp,pool_id,lower_price,upper_price,spot_price,fee_apr,weight";
    if (line != expected) {
        std::string missing;
        std::stringstream want(expected);
        std::string col;
        while (std::getline(want, col, ',')) {
            if (("," + line + ",").find("," + col + ",") == std::string::npos) {
                missing += missing.empty() ? col : ", " + col;
            }
        }
        if (!missing.empty()) {
            throw std::runtime_error("positions header missing column(s): " + missing);
        }
        throw std::runtime_error("positions header mismatch; expected '" + expected +
                                 "', got '" + line + "'");
    }

    IngestResult result;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            fields.push_back(field);
        }
        auto reject = [&](const std::string& why) {
            result.row_errors.push_back("line " + std::to_string(line_no) + ": " + why);
        };
        if (fields.size() != 7) {
            reject("expected 7 fields, got " + std::to_string(fields.size()));
            continue;
        }
        PositionRecord rec;
        try {
            rec.timestamp = parse_iso8601_utc(fields[0]);
        } catch (const std::invalid_argument& e) {
            reject(e.what());
            continue;
        }
        rec.pool_id = fields[1];
        double* numeric[] = {&rec.lower_price, &rec.upper_price, &rec.spot_price,
                             &rec.fee_apr, &rec.weight};
        const char* names[] = {"lower_price", "upper_price", "spot_price", "fee_apr",
                               "weight"};
        bool ok = true;
        for (int i = 0; i < 5; ++i) {
            std::size_t pos_end = 0;
            try {
                *numeric[i] = std::stod(fields[i + 2], &pos_end);
            } catch (const std::exception&) {
                pos_end = 0;
            }
            if (pos_end != fields[i + 2].size() || !std::isfinite(*numeric[i])) {
                reject(std::string("non-numeric ") + names[i] + " '" + fields[i + 2] + "'");
                ok = false;
                break;
            }
        }
        if (!ok) {
            continue;
        }
        if (!(rec.lower_price > 0.0 && rec.lower_price < rec.spot_price)) {
            reject("lower_price must satisfy 0 < lower_price < spot_price");
            continue;
        }
        if (!(rec.spot_price < rec.upper_price)) {
            reject("upper_price must satisfy spot_price < upper_price");
            continue;
        }
        if (!(rec.fee_apr >= 0.0)) {
            reject("fee_apr must be >= 0");
            continue;
        }
        if (!(rec.weight > 0.0)) {
            reject("weight must be > 0");
            continue;
        }
        result.records.push_back(std::move(rec));
    }
    if (result.records.empty()) {
        throw std::runtime_error("no valid rows in positions file: " + path);
    }
    return result;
}

std::vector<IvPoint> weighted_iv_series(const std::vector<PositionRecord>& records,
                                        Bucket bucket, const IvSolverConfig& cfg) {
    if (records.empty()) {
        throw std::invalid_argument("records must be nonempty");
    }
    const std::int64_t width = bucket == Bucket::Daily ? 86400 : 3600;

    std::map<std::int64_t, std::vector<const PositionRecord*>> buckets;
    for (const PositionRecord& rec : records) {
        std::int64_t start = rec.timestamp - (((rec.timestamp % width) + width) % width);
        buckets[start].push_back(&rec);
    }

    std::vector<IvPoint> points;
    points.reserve(buckets.size());
    for (const auto& [start, recs] : buckets) {
        IvPoint pt;
        pt.bucket_start = start;
        double w_root = 0.0, iv_acc = 0.0;
        double w_all = 0.0, lvr_acc = 0.0, fee_acc = 0.0;
        for (const PositionRecord* rec : recs) {
            w_all += rec->weight;
            lvr_acc += rec->weight * lvr_iv(rec->fee_apr);
            fee_acc += rec->weight * rec->fee_apr;
            const NormalizedPosition pos = normalize_position(
                {rec->spot_price, rec->lower_price, rec->upper_price});
            IvSolverConfig solver = cfg;
            solver.fee_annual = rec->fee_apr;
            try {
                const IvSolveResult res = break_even_iv(pos, 1.0, solver);
                iv_acc += rec->weight * res.sigma;
                w_root += rec->weight;
                ++pt.n_positions;
            } catch (const NoRootError&) {
                ++pt.n_failed;
            }
        }
        if (pt.n_positions > 0) {
            pt.weighted_iv = iv_acc / w_root;
            pt.lvr_iv = lvr_acc / w_all;
            pt.mean_fee_apr = fee_acc / w_all;
        } else {
            pt.weighted_iv = kNaN;
            pt.lvr_iv = kNaN;
            pt.mean_fee_apr = fee_acc / w_all;
        }
        points.push_back(pt);
    }
    return points;
}

void write_iv_series_csv(const std::vector<IvPoint>& points, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open iv series output file: " + path);
    }
    out << "bucket_start,n_positions,weighted_iv,lvr_iv,mean_fee_apr\n";
    char line[160];
    for (const IvPoint& pt : points) {
        std::snprintf(line, sizeof(line), "%s,%d,%.12g,%.12g,%.12g\n",
                      format_iso8601_utc(pt.bucket_start).c_str(), pt.n_positions,
                      pt.weighted_iv, pt.lvr_iv, pt.mean_fee_apr);
        out << line;
    }
}

}  // namespace rnp
