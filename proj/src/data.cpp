#include "rlt/data.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rlt {

namespace {

// Howard Hinnant's civil-date algorithms
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 +
                         static_cast<unsigned>(d) - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

}  // namespace

Date Date::parse(const std::string& iso) {
    Date d;
    char dash1 = 0, dash2 = 0;
    std::istringstream is(iso);
    if (!(is >> d.year >> dash1 >> d.month >> dash2 >> d.day) || dash1 != '-' || dash2 != '-' ||
        d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31)
        throw DataError("bad ISO-8601 date: '" + iso + "'");
    if (Date::from_days(d.to_days()) != d)  // e.g. February 30th
        throw DataError("invalid calendar date: '" + iso + "'");
    return d;
}

Date Date::from_days(std::int64_t days) {
    Date d;
    civil_from_days(days, d.year, d.month, d.day);
    return d;
}

std::int64_t Date::to_days() const { return days_from_civil(year, month, day); }

int Date::weekday() const {
    // 1970-01-01 was a Thursday
    const std::int64_t days = to_days();
    return static_cast<int>(((days % 7) + 7 + 3) % 7);
}

bool Date::leap() const {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int Date::day_of_year() const {
    static constexpr std::array<int, 12> cum = {0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334};
    return cum[static_cast<std::size_t>(month - 1)] + day + (leap() && month > 2 ? 1 : 0);
}

std::string Date::iso() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

namespace {

bool parse_row(const std::string& line, Bar& bar, std::string& err) {
    std::istringstream is(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(is, field, ',')) fields.push_back(field);
    if (fields.size() != 5) {
        err = "expected 5 columns, got " + std::to_string(fields.size());
        return false;
    }
    try {
        bar.timestamp = Date::parse(fields[0]);
    } catch (const DataError& e) {
        err = e.what();
        return false;
    }
    double* dst[4] = {&bar.open, &bar.high, &bar.low, &bar.close};
    const char* name[4] = {"open", "high", "low", "close"};
    for (int i = 0; i < 4; ++i) {
        std::size_t pos = 0;
        try {
            *dst[i] = std::stod(fields[static_cast<std::size_t>(i) + 1], &pos);
        } catch (...) {
            err = std::string("non-numeric ") + name[i];
            return false;
        }
        if (pos != fields[static_cast<std::size_t>(i) + 1].size() || !std::isfinite(*dst[i])) {
            err = std::string("non-numeric ") + name[i];
            return false;
        }
    }
    return true;
}

bool ohlc_ok(const Bar& b, std::string& err) {
    const double body_lo = std::min(b.open, b.close);
    const double body_hi = std::max(b.open, b.close);
    if (!(b.low <= body_lo && body_hi <= b.high)) {
        err = "OHLC ordering violated (low <= min(open,close) <= max(open,close) <= high)";
        return false;
    }
    return true;
}

}  // namespace

std::vector<CsvViolation> validate_csv(const std::string& path) {
    std::vector<CsvViolation> out;
    std::ifstream in(path);
    if (!in) {
        out.push_back({0, "cannot open file: " + path});
        return out;
    }
    std::string line;
    if (!std::getline(in, line)) {
        out.push_back({1, "empty file"});
        return out;
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "timestamp,open,high,low,close") {
        out.push_back({1, "bad header, expected 'timestamp,open,high,low,close'"});
        return out;
    }
    std::size_t lineno = 1;
    bool have_prev = false;
    Date prev_ts;
    std::size_t prev_line = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        Bar bar;
        std::string err;
        if (!parse_row(line, bar, err)) {
            out.push_back({lineno, err});
            continue;
        }
        if (!ohlc_ok(bar, err)) out.push_back({lineno, err});
        if (have_prev) {
            if (bar.timestamp == prev_ts)
                out.push_back({lineno, "duplicate timestamp " + bar.timestamp.iso() +
                                           " (also on line " + std::to_string(prev_line) + ")"});
            else if (bar.timestamp < prev_ts)
                out.push_back({lineno, "timestamps not strictly increasing"});
        }
        prev_ts = bar.timestamp;
        prev_line = lineno;
        have_prev = true;
    }
    return out;
}

MarketSeries load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "timestamp,open,high,low,close")
        throw DataError(path + ": bad header, expected 'timestamp,open,high,low,close'");
    MarketSeries series;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        Bar bar;
        std::string err;
        if (!parse_row(line, bar, err) || !ohlc_ok(bar, err))
            throw DataError(path + ":" + std::to_string(lineno) + ": " + err);
        if (!series.empty() && !(series.back().timestamp < bar.timestamp))
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": timestamps must be strictly increasing");
        series.push_back(bar);
    }
    return series;
}

void save_csv(const std::string& path, const MarketSeries& series) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << "timestamp,open,high,low,close\n";
    char buf[128];
    for (const Bar& b : series) {
        std::snprintf(buf, sizeof buf, "%s,%.10f,%.10f,%.10f,%.10f\n", b.timestamp.iso().c_str(),
                      b.open, b.high, b.low, b.close);
        out << buf;
    }
}

namespace {

MarketSeries bars_from_closes(Date start, const std::vector<double>& closes, Rng& rng) {
    MarketSeries series;
    series.reserve(closes.size());
    std::int64_t day = start.to_days();
    double prev = closes.empty() ? 0.0 : closes.front();
    for (double close : closes) {
        Bar b;
        b.timestamp = Date::from_days(day++);
        b.open = prev;
        b.close = close;
        const double wick = std::abs(close - prev) * 0.25 + close * 1e-4 * rng.uniform();
        b.high = std::max(b.open, b.close) + wick;
        b.low = std::min(b.open, b.close) - wick;
        prev = close;
        series.push_back(b);
    }
    return series;
}

}  // namespace

MarketSeries synthetic_walk(Date start, std::size_t bars, double drift, double vol,
                            std::uint64_t seed, double start_price) {
    Rng rng(seed);
    std::vector<double> closes;
    closes.reserve(bars);
    double price = start_price;
    for (std::size_t i = 0; i < bars; ++i) {
        price *= std::exp(drift + vol * rng.normal());
        closes.push_back(price);
    }
    return bars_from_closes(start, closes, rng);
}

MarketSeries synthetic_regimes(Date start, std::size_t bars, double drift, double noise,
                               std::size_t regime_len, std::uint64_t seed, double start_price) {
    Rng rng(seed);
    std::vector<double> closes;
    closes.reserve(bars);
    double price = start_price;
    for (std::size_t i = 0; i < bars; ++i) {
        const double sign = (i / regime_len) % 2 == 0 ? 1.0 : -1.0;
        price *= std::exp(sign * drift + noise * rng.normal());
        closes.push_back(price);
    }
    return bars_from_closes(start, closes, rng);
}

}  // namespace rlt
