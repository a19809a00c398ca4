#include "rlt/benchmarks.hpp"

#include <map>

namespace rlt {

Rollout buy_and_hold(const FeatureFrame& frame, std::size_t begin, std::size_t end,
                     const EnvConfig& cfg) {
    TradingEnv env(frame, begin, end, cfg);
    env.reset();
    while (!env.done()) env.step(Position::Long);
    Rollout out;
    out.trades = env.finished_trades();
    out.curve = env.curve();
    out.positions = env.position_history();
    return out;
}

Rollout perfect_annual(const FeatureFrame& frame, std::size_t begin, std::size_t end,
                       const EnvConfig& cfg) {
    const std::size_t first = begin + cfg.lookback;  // first return bar
    if (first >= end) throw DataError("perfect_annual: segment too short");

    // close-to-close return per calendar year over the decidable span
    std::map<int, std::pair<double, double>> year_span;  // year -> (base, last close)
    double base = frame.closes[first - 1];
    int prev_year = -1;
    for (std::size_t i = first; i < end; ++i) {
        const int y = frame.timestamps[i].year;
        if (y != prev_year) {
            if (prev_year != -1) base = year_span[prev_year].second;
            year_span[y] = {base, frame.closes[i]};
            prev_year = y;
        } else {
            year_span[y].second = frame.closes[i];
        }
    }
    std::map<int, Position> year_position;
    Position prev_pos = Position::Long;
    for (const auto& [y, span] : year_span) {
        const double ret = span.second / span.first - 1.0;
        Position pos = ret > 0.0 ? Position::Long : ret < 0.0 ? Position::Short : prev_pos;
        year_position[y] = pos;
        prev_pos = pos;
    }

    TradingEnv env(frame, begin, end, cfg);
    env.reset();
    std::size_t cursor = first;
    while (!env.done()) {
        env.step(year_position.at(frame.timestamps[cursor].year));
        ++cursor;
    }
    Rollout out;
    out.trades = env.finished_trades();
    out.curve = env.curve();
    out.positions = env.position_history();
    return out;
}

}  // namespace rlt
