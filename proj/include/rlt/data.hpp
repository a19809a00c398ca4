#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlt/rng.hpp"

namespace rlt {

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Calendar date, used as the bar timestamp (daily data).
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    static Date parse(const std::string& iso);  // "YYYY-MM-DD"
    static Date from_days(std::int64_t days_since_epoch);
    std::int64_t to_days() const;  // days since 1970-01-01
    int weekday() const;           // 0 = Monday ... 6 = Sunday
    int day_of_year() const;       // 1-based
    bool leap() const;
    std::string iso() const;

    auto operator<=>(const Date&) const = default;
};

struct Bar {
    Date timestamp;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
};

using MarketSeries = std::vector<Bar>;

struct CsvViolation {
    std::size_t line;  // 1-based, header is line 1
    std::string message;
};

// Parses `timestamp,open,high,low,close` with an ISO-8601 date column.
// Throws DataError on the first violation.
MarketSeries load_csv(const std::string& path);

// Full-file validation: schema, OHLC ordering, monotone unique timestamps.
std::vector<CsvViolation> validate_csv(const std::string& path);

void save_csv(const std::string& path, const MarketSeries& series);

// Synthetic generators (the data contract ships no market data).
// Geometric random walk with constant drift/vol per bar.
MarketSeries synthetic_walk(Date start, std::size_t bars, double drift, double vol,
                            std::uint64_t seed, double start_price = 100.0);

// Alternating drift regimes: +drift for `regime_len` bars, then -drift, with
// Gaussian noise. The regime is observable from recent returns.
MarketSeries synthetic_regimes(Date start, std::size_t bars, double drift, double noise,
                               std::size_t regime_len, std::uint64_t seed,
                               double start_price = 100.0);

}  // namespace rlt
