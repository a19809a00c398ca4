#pragma once

#include <array>
#include <functional>
#include <vector>

#include "rlt/features.hpp"

namespace rlt {

enum class Position : int { Long = 0, Short = 1, Flat = 2 };

inline double position_sign(Position p) {
    return p == Position::Long ? 1.0 : p == Position::Short ? -1.0 : 0.0;
}

struct EnvConfig {
    double provision_rate = 0.0001;  // fraction charged per position opening
    double reward_scale = 100.0;
    std::size_t lookback = 20;
    double initial_capital = 10000.0;
};

struct TradeRecord {
    Date open_time;
    Date close_time;
    Position direction = Position::Flat;
    double entry_equity = 0.0;  // at open, before its provision
    double exit_equity = 0.0;
    double provision_paid = 0.0;
    std::size_t bars_held = 0;
};

using TradeLog = std::vector<TradeRecord>;

struct EquityCurve {
    std::vector<Date> timestamps;
    std::vector<double> equity;
    double initial_capital = 0.0;
};

struct StepResult {
    Observation observation;
    double reward = 0.0;
    bool done = false;
    double equity = 0.0;
    Position position = Position::Flat;
    double provision_charged = 0.0;
};

// Episodic trading environment over a contiguous slice of a normalized
// feature frame. The position chosen at the close of bar t-1 is held over
// bar t; equity_{t}/equity_{t-1} = 1 + sign*rho - rate*opened.
class TradingEnv {
public:
    TradingEnv(const FeatureFrame& frame, std::size_t begin, std::size_t end, EnvConfig cfg);

    Observation reset();
    StepResult step(Position action);

    bool done() const { return cursor_ >= end_; }
    double equity() const { return equity_; }
    Position position() const { return position_; }
    std::size_t steps_remaining() const { return end_ - cursor_; }
    std::size_t decidable_steps() const { return end_ - begin_ - cfg_.lookback; }

    const EquityCurve& curve() const { return curve_; }
    const std::vector<Position>& position_history() const { return positions_; }
    // closes the still-open trade (if any) at the current bar
    TradeLog finished_trades();

    const EnvConfig& config() const { return cfg_; }

private:
    const FeatureFrame* frame_;
    std::size_t begin_, end_;
    EnvConfig cfg_;

    std::size_t cursor_ = 0;
    Position position_ = Position::Flat;
    double equity_ = 0.0;
    bool active_ = false;

    EquityCurve curve_;
    std::vector<Position> positions_;
    TradeLog trades_;
    bool trade_open_ = false;
    TradeRecord open_trade_;

    Observation observe() const;
    void close_trade(const Date& when);
};

inline double provision_charge(double equity, double rate) {
    if (rate < 0.0) throw std::invalid_argument("negative provision rate");
    return rate * equity;
}

// Deterministic rollout of a frozen policy. Returns the equity curve, the
// closed-out trade log and the per-step position sequence.
struct Rollout {
    EquityCurve curve;
    TradeLog trades;
    std::vector<Position> positions;
};

Rollout run_policy(TradingEnv& env, const std::function<Position(const Observation&)>& policy);

}  // namespace rlt
