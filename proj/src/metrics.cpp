#include "rlt/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

namespace rlt {

double cagr(double begin, double end, double years) {
    if (begin <= 0.0) throw MetricError("cagr: nonpositive beginning value");
    if (years <= 0.0) throw MetricError("cagr: nonpositive year span");
    return std::pow(end / begin, 1.0 / years) - 1.0;
}

std::optional<double> sharpe(const std::vector<double>& returns, double periods_per_year) {
    if (returns.size() < 2) return std::nullopt;
    const double n = static_cast<double>(returns.size());
    const double mean = std::accumulate(returns.begin(), returns.end(), 0.0) / n;
    double ss = 0.0;
    for (double r : returns) ss += (r - mean) * (r - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    if (sd == 0.0) return std::nullopt;
    return mean / sd * std::sqrt(periods_per_year);
}

std::optional<double> sortino(const std::vector<double>& returns, double periods_per_year) {
    if (returns.empty()) return std::nullopt;
    const double n = static_cast<double>(returns.size());
    const double mean = std::accumulate(returns.begin(), returns.end(), 0.0) / n;
    double ss = 0.0;
    bool any_negative = false;
    for (double r : returns) {
        if (r < 0.0) {
            ss += r * r;
            any_negative = true;
        }
    }
    if (!any_negative) return std::nullopt;
    const double sd = std::sqrt(ss / n);
    return mean / sd * std::sqrt(periods_per_year);
}

DrawdownResult max_drawdown(const std::vector<double>& equity) {
    if (equity.empty()) throw MetricError("max_drawdown: empty curve");
    DrawdownResult best;
    double peak = equity[0];
    std::size_t peak_idx = 0;
    std::size_t best_peak_idx = 0;
    for (std::size_t i = 0; i < equity.size(); ++i) {
        if (equity[i] > peak) {
            peak = equity[i];
            peak_idx = i;
        }
        const double dd = equity[i] / peak - 1.0;
        if (dd < best.fraction) {
            best.fraction = dd;
            best_peak_idx = peak_idx;
        }
    }
    if (best.fraction < 0.0) {
        const double ref = equity[best_peak_idx];
        std::size_t recovery = equity.size() - 1;
        for (std::size_t i = best_peak_idx + 1; i < equity.size(); ++i)
            if (equity[i] >= ref) {
                recovery = i;
                break;
            }
        best.duration = recovery - best_peak_idx;
    }
    return best;
}

std::vector<double> bar_returns(const EquityCurve& curve) {
    std::vector<double> out;
    if (curve.equity.size() < 2) return out;
    out.reserve(curve.equity.size() - 1);
    for (std::size_t i = 1; i < curve.equity.size(); ++i)
        out.push_back(curve.equity[i] / curve.equity[i - 1] - 1.0);
    return out;
}

TradeStats trade_stats(const TradeLog& log, const std::vector<Position>& positions) {
    TradeStats s;
    s.total_trades = log.size();
    if (!log.empty()) {
        std::size_t wins = 0, bars = 0;
        for (const auto& t : log) {
            if (t.exit_equity > t.entry_equity) ++wins;
            bars += t.bars_held;
            s.provision_sum += t.provision_paid;
        }
        s.win_rate = 100.0 * static_cast<double>(wins) / static_cast<double>(log.size());
        s.avg_duration_bars = static_cast<double>(bars) / static_cast<double>(log.size());
    }
    if (!positions.empty()) {
        std::size_t n_long = 0, n_short = 0, n_flat = 0;
        for (Position p : positions) {
            if (p == Position::Long)
                ++n_long;
            else if (p == Position::Short)
                ++n_short;
            else
                ++n_flat;
        }
        const double n = static_cast<double>(positions.size());
        s.pct_long = 100.0 * static_cast<double>(n_long) / n;
        s.pct_short = 100.0 * static_cast<double>(n_short) / n;
        s.pct_out = 100.0 * static_cast<double>(n_flat) / n;
    }
    return s;
}

PerformanceReport full_report(const EquityCurve& curve, const TradeLog& log,
                              const std::vector<Position>& positions,
                              const AnnualizationConfig& annualization,
                              const std::string& strategy_name) {
    if (curve.equity.empty()) throw MetricError("full_report: empty equity curve");
    PerformanceReport r;
    r.strategy = strategy_name;
    r.final_balance = curve.equity.back();
    const double days = static_cast<double>(curve.timestamps.back().to_days() -
                                            curve.timestamps.front().to_days());
    r.years = days > 0.0 ? days / 365.25 : 0.0;
    r.cagr = r.years > 0.0 ? cagr(curve.initial_capital, r.final_balance, r.years) : 0.0;

    const std::vector<double> rets = bar_returns(curve);
    const double n_per_year = annualization.periods_per_year;
    if (rets.size() >= 2) {
        const double n = static_cast<double>(rets.size());
        const double mean = std::accumulate(rets.begin(), rets.end(), 0.0) / n;
        double ss = 0.0;
        for (double x : rets) ss += (x - mean) * (x - mean);
        const double sd = std::sqrt(ss / (n - 1.0));
        if (sd > 0.0) r.annualized_std = sd * std::sqrt(n_per_year);
    }
    r.sharpe = sharpe(rets, n_per_year);
    r.sortino = sortino(rets, n_per_year);

    const DrawdownResult dd = max_drawdown(curve.equity);
    r.max_drawdown = dd.fraction;
    r.max_drawdown_duration = dd.duration;

    const TradeStats ts = trade_stats(log, positions);
    r.total_trades = ts.total_trades;
    r.avg_position_duration = ts.avg_duration_bars;
    r.win_rate = ts.win_rate;
    r.provision_sum = ts.provision_sum;
    r.pct_long = ts.pct_long;
    r.pct_short = ts.pct_short;
    r.pct_out = ts.pct_out;
    return r;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : "undefined"; }

}  // namespace

nlohmann::json report_to_json(const PerformanceReport& r) {
    nlohmann::json j;
    j["strategy"] = r.strategy;
    j["final_balance"] = r.final_balance;
    j["provision_sum"] = r.provision_sum;
    j["total_trades"] = r.total_trades;
    j["cagr"] = r.cagr;
    j["annualized_std"] = r.annualized_std ? nlohmann::json(*r.annualized_std) : nlohmann::json();
    j["sharpe"] = r.sharpe ? nlohmann::json(*r.sharpe) : nlohmann::json();
    j["sortino"] = r.sortino ? nlohmann::json(*r.sortino) : nlohmann::json();
    j["max_drawdown"] = r.max_drawdown;
    j["max_drawdown_duration"] = r.max_drawdown_duration;
    j["avg_position_duration"] = r.avg_position_duration;
    j["win_rate"] = r.win_rate ? nlohmann::json(*r.win_rate) : nlohmann::json();
    j["pct_long"] = r.pct_long;
    j["pct_short"] = r.pct_short;
    j["pct_out"] = r.pct_out;
    j["years"] = r.years;
    return j;
}

std::string report_csv_header() {
    return "strategy,final_balance,provision_sum,total_trades,cagr,annualized_std,"
           "sharpe,sortino,max_drawdown,max_drawdown_duration,avg_position_duration,"
           "win_rate,pct_long,pct_short,pct_out";
}

std::string report_csv_row(const PerformanceReport& r) {
    std::string row = r.strategy;
    row += "," + fmt(r.final_balance);
    row += "," + fmt(-r.provision_sum);  // tables report the sum as a negative flow
    row += "," + std::to_string(r.total_trades);
    row += "," + fmt(r.cagr);
    row += "," + fmt_opt(r.annualized_std);
    row += "," + fmt_opt(r.sharpe);
    row += "," + fmt_opt(r.sortino);
    row += "," + fmt(r.max_drawdown);
    row += "," + std::to_string(r.max_drawdown_duration);
    row += "," + fmt(r.avg_position_duration);
    row += "," + fmt_opt(r.win_rate);
    row += "," + fmt(r.pct_long);
    row += "," + fmt(r.pct_short);
    row += "," + fmt(r.pct_out);
    return row;
}

}  // namespace rlt
