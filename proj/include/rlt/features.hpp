#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "rlt/data.hpp"
#include "rlt/tensor.hpp"

namespace rlt {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- raw indicator series, aligned with the input; undefined prefix is NaN ---

std::vector<double> log_returns(const std::vector<double>& closes);
std::vector<double> sma(const std::vector<double>& closes, std::size_t period);
std::vector<double> ema(const std::vector<double>& closes, std::size_t period);
std::vector<double> rsi(const std::vector<double>& closes, std::size_t period);  // Wilder
std::vector<double> atr(const MarketSeries& bars, std::size_t period);           // Wilder

struct MacdResult {
    std::vector<double> macd;
    std::vector<double> signal;
    std::vector<double> histogram;
};
MacdResult macd(const std::vector<double>& closes, std::size_t fast, std::size_t slow,
                std::size_t signal);

// (sin, cos) for the weekly and yearly cycles, phase in [0,1)
struct TimeEncoding {
    double week_sin, week_cos, year_sin, year_cos;
};
TimeEncoding time_encoding(const Date& date);

// --- feature assembly ---

struct FeatureSpec {
    bool log_return = true;
    bool ohlc_relatives = true;  // open/high/low relative to close
    std::size_t rsi_period = 14;          // 0 disables
    std::vector<std::size_t> sma_periods = {10, 50};  // close/sma - 1
    std::vector<std::size_t> ema_periods = {10, 50};  // close/ema - 1
    std::size_t atr_period = 14;          // atr/close, 0 disables
    bool use_macd = true;                 // macd/signal/histogram over close
    std::size_t macd_fast = 12, macd_slow = 26, macd_signal = 9;
    bool time_encodings = true;

    std::size_t warmup() const;
    std::vector<std::string> column_names() const;
};

// Bars with every feature defined (warm-up rows trimmed).
struct FeatureFrame {
    std::vector<Date> timestamps;
    std::vector<double> closes;
    Tensor features;  // rows x columns
    std::vector<std::string> columns;

    std::size_t rows() const { return timestamps.size(); }
    std::size_t feature_count() const { return features.cols(); }
};

FeatureFrame build_features(const MarketSeries& series, const FeatureSpec& spec);

// Per-column standardization fitted on a timestamp span (leak-free).
struct Scaler {
    std::vector<double> mean;
    std::vector<double> stddev;  // sample, n-1 denominator
    Date fit_begin, fit_end;

    void apply(Tensor& features) const;
};

Scaler fit_scaler(const FeatureFrame& frame, const Date& span_begin, const Date& span_end);

// The RL state: a normalized lookback window plus the current position.
struct Observation {
    Tensor window;                     // lookback x feature_count
    std::array<double, 3> position{};  // one-hot: long, short, flat
};

// Dense-net encoding: flattened window with the one-hot appended.
Tensor encode_flat(const Observation& obs);
// Transformer encoding: the one-hot broadcast onto every row.
Tensor encode_sequence(const Observation& obs);

// Windows over a (normalized) feature matrix: observation t stacks rows
// t-lookback+1 .. t. Returns the first valid index (lookback-1).
Tensor window_at(const Tensor& features, std::size_t t, std::size_t lookback);

}  // namespace rlt
