#include "rlt/env.hpp"

#include "rlt/network.hpp"

namespace rlt {

TradingEnv::TradingEnv(const FeatureFrame& frame, std::size_t begin, std::size_t end,
                       EnvConfig cfg)
    : frame_(&frame), begin_(begin), end_(end), cfg_(cfg) {
    if (end_ > frame.rows() || begin_ >= end_)
        throw DataError("env: segment out of range");
    if (end_ - begin_ <= cfg_.lookback)
        throw DataError("env: segment must be longer than the lookback (" +
                        std::to_string(cfg_.lookback) + " bars)");
}

Observation TradingEnv::observe() const {
    Observation obs;
    obs.window = window_at(frame_->features, cursor_ - 1, cfg_.lookback);
    obs.position.fill(0.0);
    obs.position[static_cast<std::size_t>(position_)] = 1.0;
    return obs;
}

Observation TradingEnv::reset() {
    cursor_ = begin_ + cfg_.lookback;
    position_ = Position::Flat;
    equity_ = cfg_.initial_capital;
    active_ = true;
    trades_.clear();
    trade_open_ = false;
    positions_.clear();
    curve_ = EquityCurve{};
    curve_.initial_capital = cfg_.initial_capital;
    curve_.timestamps.push_back(frame_->timestamps[cursor_ - 1]);
    curve_.equity.push_back(equity_);
    return observe();
}

void TradingEnv::close_trade(const Date& when) {
    open_trade_.close_time = when;
    open_trade_.exit_equity = equity_;
    trades_.push_back(open_trade_);
    trade_open_ = false;
}

StepResult TradingEnv::step(Position action) {
    if (!active_) throw StateError("env: step before reset");
    if (done()) throw StateError("env: step after episode end");

    const Date decision_time = frame_->timestamps[cursor_ - 1];
    const bool opened = action != position_ && action != Position::Flat;
    double provision = 0.0;

    if (action != position_) {
        if (trade_open_) close_trade(decision_time);
        if (action != Position::Flat) {
            provision = provision_charge(equity_, cfg_.provision_rate);
            open_trade_ = TradeRecord{};
            open_trade_.open_time = decision_time;
            open_trade_.direction = action;
            open_trade_.entry_equity = equity_;
            open_trade_.provision_paid = provision;
            trade_open_ = true;
        }
        position_ = action;
    }

    const double rho = frame_->closes[cursor_] / frame_->closes[cursor_ - 1] - 1.0;
    const double signed_return = position_sign(position_) * rho;
    const double cost = opened ? cfg_.provision_rate : 0.0;
    equity_ *= 1.0 + signed_return - cost;
    if (trade_open_) ++open_trade_.bars_held;

    StepResult result;
    result.reward = cfg_.reward_scale * (signed_return - cost);
    result.equity = equity_;
    result.position = position_;
    result.provision_charged = provision;
    positions_.push_back(position_);
    curve_.timestamps.push_back(frame_->timestamps[cursor_]);
    curve_.equity.push_back(equity_);

    ++cursor_;
    result.done = done();
    if (!result.done) result.observation = observe();
    return result;
}

TradeLog TradingEnv::finished_trades() {
    if (trade_open_) close_trade(frame_->timestamps[cursor_ - 1]);
    return trades_;
}

Rollout run_policy(TradingEnv& env, const std::function<Position(const Observation&)>& policy) {
    Observation obs = env.reset();
    while (!env.done()) {
        const StepResult r = env.step(policy(obs));
        if (!r.done) obs = r.observation;
    }
    Rollout out;
    out.trades = env.finished_trades();
    out.curve = env.curve();
    out.positions = env.position_history();
    return out;
}

}  // namespace rlt
