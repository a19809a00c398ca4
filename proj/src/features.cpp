#include "rlt/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace rlt {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::vector<double> log_returns(const std::vector<double>& closes) {
    std::vector<double> out(closes.size(), kNaN);
    for (std::size_t i = 1; i < closes.size(); ++i) {
        if (closes[i] <= 0.0 || closes[i - 1] <= 0.0)
            throw DataError("log_returns: nonpositive price at index " + std::to_string(i));
        out[i] = std::log(closes[i] / closes[i - 1]);
    }
    return out;
}

std::vector<double> sma(const std::vector<double>& closes, std::size_t period) {
    std::vector<double> out(closes.size(), kNaN);
    if (period == 0 || closes.size() < period) return out;
    double sum = 0.0;
    for (std::size_t i = 0; i < closes.size(); ++i) {
        sum += closes[i];
        if (i >= period) sum -= closes[i - period];
        if (i + 1 >= period) out[i] = sum / static_cast<double>(period);
    }
    return out;
}

std::vector<double> ema(const std::vector<double>& closes, std::size_t period) {
    std::vector<double> out(closes.size(), kNaN);
    if (period == 0 || closes.size() < period) return out;
    // SMA seed, then standard smoothing
    double seed = 0.0;
    for (std::size_t i = 0; i < period; ++i) seed += closes[i];
    seed /= static_cast<double>(period);
    out[period - 1] = seed;
    const double alpha = 2.0 / (static_cast<double>(period) + 1.0);
    for (std::size_t i = period; i < closes.size(); ++i)
        out[i] = alpha * closes[i] + (1.0 - alpha) * out[i - 1];
    return out;
}

std::vector<double> rsi(const std::vector<double>& closes, std::size_t period) {
    std::vector<double> out(closes.size(), kNaN);
    if (period == 0 || closes.size() <= period) return out;
    double avg_gain = 0.0, avg_loss = 0.0;
    for (std::size_t i = 1; i <= period; ++i) {
        const double d = closes[i] - closes[i - 1];
        avg_gain += std::max(d, 0.0);
        avg_loss += std::max(-d, 0.0);
    }
    avg_gain /= static_cast<double>(period);
    avg_loss /= static_cast<double>(period);
    auto value = [](double g, double l) {
        if (l == 0.0 && g == 0.0) return 50.0;  // flat window
        if (l == 0.0) return 100.0;
        return 100.0 - 100.0 / (1.0 + g / l);
    };
    out[period] = value(avg_gain, avg_loss);
    const double p = static_cast<double>(period);
    for (std::size_t i = period + 1; i < closes.size(); ++i) {
        const double d = closes[i] - closes[i - 1];
        avg_gain = (avg_gain * (p - 1.0) + std::max(d, 0.0)) / p;
        avg_loss = (avg_loss * (p - 1.0) + std::max(-d, 0.0)) / p;
        out[i] = value(avg_gain, avg_loss);
    }
    return out;
}

std::vector<double> atr(const MarketSeries& bars, std::size_t period) {
    std::vector<double> out(bars.size(), kNaN);
    if (period == 0 || bars.size() <= period) return out;
    std::vector<double> tr(bars.size(), kNaN);
    for (std::size_t i = 1; i < bars.size(); ++i) {
        const double prev_close = bars[i - 1].close;
        tr[i] = std::max({bars[i].high - bars[i].low, std::abs(bars[i].high - prev_close),
                          std::abs(bars[i].low - prev_close)});
    }
    double seed = 0.0;
    for (std::size_t i = 1; i <= period; ++i) seed += tr[i];
    out[period] = seed / static_cast<double>(period);
    const double p = static_cast<double>(period);
    for (std::size_t i = period + 1; i < bars.size(); ++i)
        out[i] = (out[i - 1] * (p - 1.0) + tr[i]) / p;
    return out;
}

MacdResult macd(const std::vector<double>& closes, std::size_t fast, std::size_t slow,
                std::size_t signal) {
    MacdResult r;
    const std::size_t n = closes.size();
    r.macd.assign(n, kNaN);
    r.signal.assign(n, kNaN);
    r.histogram.assign(n, kNaN);
    const auto ef = ema(closes, fast);
    const auto es = ema(closes, slow);
    const std::size_t first = std::max(fast, slow) - 1;
    for (std::size_t i = first; i < n; ++i)
        if (!std::isnan(ef[i]) && !std::isnan(es[i])) r.macd[i] = ef[i] - es[i];
    // EMA of the macd line, SMA seed over its first `signal` values
    if (signal > 0 && n >= first + signal) {
        double seed = 0.0;
        for (std::size_t i = first; i < first + signal; ++i) seed += r.macd[i];
        std::size_t at = first + signal - 1;
        r.signal[at] = seed / static_cast<double>(signal);
        const double alpha = 2.0 / (static_cast<double>(signal) + 1.0);
        for (std::size_t i = at + 1; i < n; ++i)
            r.signal[i] = alpha * r.macd[i] + (1.0 - alpha) * r.signal[i - 1];
        for (std::size_t i = at; i < n; ++i) r.histogram[i] = r.macd[i] - r.signal[i];
    }
    return r;
}

TimeEncoding time_encoding(const Date& date) {
    const double two_pi = 2.0 * std::numbers::pi;
    const double week_phase = static_cast<double>(date.weekday()) / 7.0;
    const double days_in_year = date.leap() ? 366.0 : 365.0;
    const double year_phase = static_cast<double>(date.day_of_year() - 1) / days_in_year;
    return {std::sin(two_pi * week_phase), std::cos(two_pi * week_phase),
            std::sin(two_pi * year_phase), std::cos(two_pi * year_phase)};
}

std::size_t FeatureSpec::warmup() const {
    std::size_t w = 0;
    if (log_return) w = std::max(w, std::size_t{1});
    if (rsi_period) w = std::max(w, rsi_period);
    for (auto p : sma_periods) w = std::max(w, p ? p - 1 : 0);
    for (auto p : ema_periods) w = std::max(w, p ? p - 1 : 0);
    if (atr_period) w = std::max(w, atr_period);
    if (use_macd) w = std::max(w, macd_slow - 1 + macd_signal - 1);
    return w;
}

std::vector<std::string> FeatureSpec::column_names() const {
    std::vector<std::string> names;
    if (log_return) names.push_back("log_return");
    if (ohlc_relatives) {
        names.push_back("open_rel");
        names.push_back("high_rel");
        names.push_back("low_rel");
    }
    if (rsi_period) names.push_back("rsi" + std::to_string(rsi_period));
    for (auto p : sma_periods) names.push_back("sma" + std::to_string(p) + "_rel");
    for (auto p : ema_periods) names.push_back("ema" + std::to_string(p) + "_rel");
    if (atr_period) names.push_back("atr" + std::to_string(atr_period) + "_rel");
    if (use_macd) {
        names.push_back("macd_rel");
        names.push_back("macd_signal_rel");
        names.push_back("macd_hist_rel");
    }
    if (time_encodings) {
        names.push_back("week_sin");
        names.push_back("week_cos");
        names.push_back("year_sin");
        names.push_back("year_cos");
    }
    return names;
}

FeatureFrame build_features(const MarketSeries& series, const FeatureSpec& spec) {
    const std::size_t warm = spec.warmup();
    if (series.size() <= warm)
        throw DataError("build_features: series shorter than feature warm-up (" +
                        std::to_string(warm) + " bars)");
    const std::size_t n = series.size();
    std::vector<double> closes(n);
    for (std::size_t i = 0; i < n; ++i) closes[i] = series[i].close;

    std::vector<std::vector<double>> cols;
    if (spec.log_return) cols.push_back(log_returns(closes));
    if (spec.ohlc_relatives) {
        std::vector<double> o(n), h(n), l(n);
        for (std::size_t i = 0; i < n; ++i) {
            o[i] = series[i].open / closes[i] - 1.0;
            h[i] = series[i].high / closes[i] - 1.0;
            l[i] = series[i].low / closes[i] - 1.0;
        }
        cols.push_back(std::move(o));
        cols.push_back(std::move(h));
        cols.push_back(std::move(l));
    }
    if (spec.rsi_period) cols.push_back(rsi(closes, spec.rsi_period));
    for (auto p : spec.sma_periods) {
        auto m = sma(closes, p);
        for (std::size_t i = 0; i < n; ++i)
            if (!std::isnan(m[i])) m[i] = closes[i] / m[i] - 1.0;
        cols.push_back(std::move(m));
    }
    for (auto p : spec.ema_periods) {
        auto m = ema(closes, p);
        for (std::size_t i = 0; i < n; ++i)
            if (!std::isnan(m[i])) m[i] = closes[i] / m[i] - 1.0;
        cols.push_back(std::move(m));
    }
    if (spec.atr_period) {
        auto a = atr(series, spec.atr_period);
        for (std::size_t i = 0; i < n; ++i)
            if (!std::isnan(a[i])) a[i] /= closes[i];
        cols.push_back(std::move(a));
    }
    if (spec.use_macd) {
        auto m = macd(closes, spec.macd_fast, spec.macd_slow, spec.macd_signal);
        for (auto* v : {&m.macd, &m.signal, &m.histogram})
            for (std::size_t i = 0; i < n; ++i)
                if (!std::isnan((*v)[i])) (*v)[i] /= closes[i];
        cols.push_back(std::move(m.macd));
        cols.push_back(std::move(m.signal));
        cols.push_back(std::move(m.histogram));
    }
    if (spec.time_encodings) {
        std::vector<double> ws(n), wc(n), ys(n), yc(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto e = time_encoding(series[i].timestamp);
            ws[i] = e.week_sin;
            wc[i] = e.week_cos;
            ys[i] = e.year_sin;
            yc[i] = e.year_cos;
        }
        cols.push_back(std::move(ws));
        cols.push_back(std::move(wc));
        cols.push_back(std::move(ys));
        cols.push_back(std::move(yc));
    }

    FeatureFrame frame;
    frame.columns = spec.column_names();
    const std::size_t rows = n - warm;
    frame.timestamps.resize(rows);
    frame.closes.resize(rows);
    frame.features = Tensor::zeros({rows, cols.size()});
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t i = r + warm;
        frame.timestamps[r] = series[i].timestamp;
        frame.closes[r] = closes[i];
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const double v = cols[c][i];
            if (std::isnan(v))
                throw DataError("feature '" + frame.columns[c] + "' undefined after warm-up");
            frame.features.at(r, c) = v;
        }
    }
    return frame;
}

Scaler fit_scaler(const FeatureFrame& frame, const Date& span_begin, const Date& span_end) {
    std::vector<std::size_t> idx;
    for (std::size_t r = 0; r < frame.rows(); ++r)
        if (!(frame.timestamps[r] < span_begin) && !(span_end < frame.timestamps[r]))
            idx.push_back(r);
    if (idx.size() < 2) throw ConfigError("fit_scaler: fit span selects fewer than 2 rows");
    Scaler s;
    s.fit_begin = span_begin;
    s.fit_end = span_end;
    const std::size_t f = frame.feature_count();
    s.mean.assign(f, 0.0);
    s.stddev.assign(f, 0.0);
    for (std::size_t c = 0; c < f; ++c) {
        double m = 0.0;
        for (auto r : idx) m += frame.features.at(r, c);
        m /= static_cast<double>(idx.size());
        double ss = 0.0;
        for (auto r : idx) {
            const double d = frame.features.at(r, c) - m;
            ss += d * d;
        }
        const double sd = std::sqrt(ss / static_cast<double>(idx.size() - 1));
        if (sd <= 0.0)
            throw ConfigError("fit_scaler: constant feature '" + frame.columns[c] +
                              "' over the fit span");
        s.mean[c] = m;
        s.stddev[c] = sd;
    }
    return s;
}

void Scaler::apply(Tensor& features) const {
    const std::size_t rows = features.rows(), f = features.cols();
    if (f != mean.size()) throw ConfigError("scaler: column count mismatch");
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < f; ++c)
            features.at(r, c) = (features.at(r, c) - mean[c]) / stddev[c];
}

Tensor window_at(const Tensor& features, std::size_t t, std::size_t lookback) {
    if (t + 1 < lookback || t >= features.rows())
        throw DataError("window_at: insufficient history for lookback window");
    const std::size_t f = features.cols();
    Tensor w = Tensor::zeros({lookback, f});
    for (std::size_t i = 0; i < lookback; ++i)
        for (std::size_t c = 0; c < f; ++c)
            w.at(i, c) = features.at(t + 1 - lookback + i, c);
    return w;
}

Tensor encode_flat(const Observation& obs) {
    Tensor out = Tensor::zeros({obs.window.size() + 3});
    std::copy(obs.window.data.begin(), obs.window.data.end(), out.data.begin());
    for (std::size_t i = 0; i < 3; ++i) out.data[obs.window.size() + i] = obs.position[i];
    return out;
}

Tensor encode_sequence(const Observation& obs) {
    const std::size_t t = obs.window.rows(), f = obs.window.cols();
    Tensor out = Tensor::zeros({t, f + 3});
    for (std::size_t i = 0; i < t; ++i) {
        for (std::size_t c = 0; c < f; ++c) out.at(i, c) = obs.window.at(i, c);
        for (std::size_t p = 0; p < 3; ++p) out.at(i, f + p) = obs.position[p];
    }
    return out;
}

}  // namespace rlt
