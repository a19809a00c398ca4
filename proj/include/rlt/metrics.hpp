#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rlt/env.hpp"

namespace rlt {

struct MetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AnnualizationConfig {
    double periods_per_year = 312.0;  // 312 FX, 252 equities, 365 crypto
};

// (end/begin)^(1/years) - 1
double cagr(double begin, double end, double years);

// (mean / sample stddev) * sqrt(N); nullopt when the deviation is zero
std::optional<double> sharpe(const std::vector<double>& returns, double periods_per_year);

// downside deviation over the full count: sqrt(sum min(r,0)^2 / n)
std::optional<double> sortino(const std::vector<double>& returns, double periods_per_year);

struct DrawdownResult {
    double fraction = 0.0;      // <= 0
    std::size_t duration = 0;   // bars from peak to first recovery (or end)
};
DrawdownResult max_drawdown(const std::vector<double>& equity);

std::vector<double> bar_returns(const EquityCurve& curve);

struct TradeStats {
    std::size_t total_trades = 0;
    double avg_duration_bars = 0.0;
    std::optional<double> win_rate;  // undefined with no trades
    double provision_sum = 0.0;
    double pct_long = 0.0;
    double pct_short = 0.0;
    double pct_out = 100.0;
};
TradeStats trade_stats(const TradeLog& log, const std::vector<Position>& positions);

struct PerformanceReport {
    std::string strategy;
    double final_balance = 0.0;
    double provision_sum = 0.0;
    std::size_t total_trades = 0;
    double cagr = 0.0;
    std::optional<double> annualized_std;
    std::optional<double> sharpe;
    std::optional<double> sortino;
    double max_drawdown = 0.0;
    std::size_t max_drawdown_duration = 0;
    double avg_position_duration = 0.0;
    std::optional<double> win_rate;
    double pct_long = 0.0;
    double pct_short = 0.0;
    double pct_out = 100.0;
    double years = 0.0;
};

PerformanceReport full_report(const EquityCurve& curve, const TradeLog& log,
                              const std::vector<Position>& positions,
                              const AnnualizationConfig& annualization,
                              const std::string& strategy_name = "");

nlohmann::json report_to_json(const PerformanceReport& r);
// Table column order: Final balance ... Out of the market
std::string report_csv_header();
std::string report_csv_row(const PerformanceReport& r);

}  // namespace rlt
