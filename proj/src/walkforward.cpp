#include "rlt/walkforward.hpp"

#include <algorithm>
#include <future>

namespace rlt {

WindowSchedule build_schedule(const Date& train_start, int first_validation_year,
                              std::size_t window_count) {
    if (window_count == 0) throw ScheduleError("schedule: need at least one window");
    if (train_start.year >= first_validation_year - 1)
        throw ScheduleError("schedule: training span must end before the first validation year");
    WindowSchedule s;
    for (std::size_t k = 0; k < window_count; ++k) {
        WindowSpec w;
        w.train_begin = train_start;
        w.validation_year = first_validation_year + static_cast<int>(k);
        w.train_end_year = w.validation_year - 1;
        w.test_year = w.validation_year + 1;
        s.windows.push_back(w);
    }
    return s;
}

SelectionResult select_generation(const std::vector<GenerationRecord>& records,
                                  const SelectionPolicy& policy) {
    if (records.empty()) throw ScheduleError("select_generation: no generation records");
    const std::size_t max_index = records.back().index;
    const double threshold = policy.min_generation_fraction * static_cast<double>(max_index);

    const GenerationRecord* best = nullptr;
    for (const auto& r : records) {
        if (static_cast<double>(r.index) < threshold) continue;
        if (!best) {
            best = &r;
            continue;
        }
        const double a = r.validation_sharpe.value_or(-1e300);
        const double b = best->validation_sharpe.value_or(-1e300);
        if (a > b) best = &r;  // ties keep the lower index
    }
    if (!best) throw ScheduleError("select_generation: no eligible candidates");

    SelectionResult out;
    out.chosen_index = best->index;
    const std::size_t radius = policy.neighbor_radius;
    for (std::size_t off = 0; off < 2 * radius + 1; ++off) {
        const std::int64_t idx = static_cast<std::int64_t>(best->index) -
                                 static_cast<std::int64_t>(radius) + static_cast<std::int64_t>(off);
        std::optional<double> metric;
        if (idx >= 0)
            for (const auto& r : records)
                if (r.index == static_cast<std::size_t>(idx)) metric = r.validation_sharpe;
        out.neighbor_sharpes.push_back(metric);
    }
    if (best->validation_sharpe && radius > 0) {
        const auto& lo = out.neighbor_sharpes[radius - 1];
        const auto& hi = out.neighbor_sharpes[radius + 1];
        if (lo && hi)
            out.robustness_warning = *best->validation_sharpe > 2.0 * *lo &&
                                     *best->validation_sharpe > 2.0 * *hi;
    }
    return out;
}

namespace {

struct SpanIndices {
    std::size_t begin = 0, end = 0;  // [begin, end)
};

// rows whose timestamp falls in [from, to], as a contiguous index range
SpanIndices span_rows(const FeatureFrame& frame, const Date& from, const Date& to) {
    SpanIndices s;
    std::size_t i = 0;
    while (i < frame.rows() && frame.timestamps[i] < from) ++i;
    s.begin = i;
    while (i < frame.rows() && !(to < frame.timestamps[i])) ++i;
    s.end = i;
    return s;
}

std::optional<double> evaluate_policy(const FeatureFrame& frame, const FrozenPolicy& policy,
                                      std::size_t begin, std::size_t end,
                                      const WalkforwardConfig& cfg, double& final_balance) {
    TradingEnv env(frame, begin, end, cfg.env);
    Rollout r = run_policy(env, [&](const Observation& o) { return policy.act(o); });
    final_balance = r.curve.equity.back();
    return sharpe(bar_returns(r.curve), cfg.annualization.periods_per_year);
}

}  // namespace

WindowResult run_window(const FeatureFrame& raw_frame, const WindowSpec& window,
                        const AgentFactory& factory, const WalkforwardConfig& cfg,
                        std::uint64_t window_seed) {
    const Date train_end{window.train_end_year, 12, 31};
    const Date val_begin{window.validation_year, 1, 1};
    const Date val_end{window.validation_year, 12, 31};
    const Date test_begin{window.test_year, 1, 1};
    const Date test_end{window.test_year, 12, 31};

    const SpanIndices train = span_rows(raw_frame, window.train_begin, train_end);
    const SpanIndices val = span_rows(raw_frame, val_begin, val_end);
    const SpanIndices test = span_rows(raw_frame, test_begin, test_end);
    const std::size_t lookback = cfg.env.lookback;
    if (train.end - train.begin <= cfg.training.subset_bars)
        throw ScheduleError("window: training span shorter than the training subset");
    if (val.begin < lookback || test.begin < lookback)
        throw ScheduleError("window: not enough history before the validation span");
    if (val.end <= val.begin || test.end <= test.begin)
        throw ScheduleError("window: data does not cover validation/test year " +
                            std::to_string(window.validation_year) + "/" +
                            std::to_string(window.test_year));
    // leak guard: scaler and training may only touch the train span
    if (!(raw_frame.timestamps[train.end - 1] < val_begin))
        throw ScheduleError("window: train span overlaps the validation span");

    FeatureFrame frame = raw_frame;
    const Scaler scaler =
        fit_scaler(raw_frame, raw_frame.timestamps[train.begin], raw_frame.timestamps[train.end - 1]);
    scaler.apply(frame.features);

    Rng rng(window_seed);
    std::unique_ptr<Agent> agent = factory(frame.feature_count(), rng);

    WindowResult result;
    result.spec = window;

    std::vector<std::unique_ptr<FrozenPolicy>> policies;
    const std::size_t slice = cfg.training.subset_bars;
    for (std::size_t cycle = 0; cycle < cfg.training.cycles; ++cycle) {
        for (std::size_t ep = 0; ep < cfg.training.episodes_per_cycle; ++ep) {
            const std::size_t max_start = train.end - train.begin - slice;
            const std::size_t start = train.begin + rng.below(max_start + 1);
            TradingEnv env(frame, start, start + slice, cfg.env);
            agent->train_episode(env, rng);
        }
        GenerationRecord rec;
        rec.index = cycle;
        auto policy = agent->snapshot();
        // validation rollout warms up with the bars preceding the span
        rec.validation_sharpe = evaluate_policy(frame, *policy, val.begin - lookback, val.end, cfg,
                                                rec.validation_balance);
        result.generations.push_back(rec);
        policies.push_back(std::move(policy));
    }

    result.selection = select_generation(result.generations, cfg.selection);
    const FrozenPolicy& chosen = *policies[result.selection.chosen_index];

    TradingEnv test_env(frame, test.begin - lookback, test.end, cfg.env);
    result.test_rollout = run_policy(test_env, [&](const Observation& o) { return chosen.act(o); });
    result.test_report = full_report(result.test_rollout.curve, result.test_rollout.trades,
                                     result.test_rollout.positions, cfg.annualization,
                                     "window_" + std::to_string(window.test_year));
    return result;
}

WalkforwardResult run_walkforward(const MarketSeries& series, const FeatureSpec& features,
                                  const WindowSchedule& schedule, const AgentFactory& factory,
                                  const WalkforwardConfig& cfg) {
    const FeatureFrame raw_frame = build_features(series, features);

    WalkforwardResult out;
    out.windows.resize(schedule.windows.size());

    const std::size_t jobs = std::max<std::size_t>(1, cfg.jobs);
    for (std::size_t base = 0; base < schedule.windows.size(); base += jobs) {
        std::vector<std::future<WindowResult>> batch;
        const std::size_t stop = std::min(base + jobs, schedule.windows.size());
        for (std::size_t k = base; k < stop; ++k)
            batch.push_back(std::async(std::launch::async, [&, k] {
                return run_window(raw_frame, schedule.windows[k], factory, cfg,
                                  mix_seed(cfg.master_seed, k));
            }));
        for (std::size_t k = base; k < stop; ++k) out.windows[k] = batch[k - base].get();
    }

    // chain test segments multiplicatively
    EquityCurve& stitched = out.stitched;
    stitched.initial_capital = cfg.env.initial_capital;
    TradeLog all_trades;
    std::vector<Position> all_positions;
    double chain = 1.0;
    for (auto& w : out.windows) {
        const EquityCurve& c = w.test_rollout.curve;
        const double scale = chain;
        const std::size_t skip = stitched.equity.empty() ? 0 : 1;
        for (std::size_t i = skip; i < c.equity.size(); ++i) {
            stitched.timestamps.push_back(c.timestamps[i]);
            stitched.equity.push_back(c.equity[i] / c.initial_capital * scale *
                                      cfg.env.initial_capital);
        }
        chain *= c.equity.back() / c.initial_capital;
        for (auto t : w.test_rollout.trades) {
            t.entry_equity *= scale;
            t.exit_equity *= scale;
            t.provision_paid *= scale;
            all_trades.push_back(t);
        }
        all_positions.insert(all_positions.end(), w.test_rollout.positions.begin(),
                             w.test_rollout.positions.end());
    }
    out.aggregate =
        full_report(stitched, all_trades, all_positions, cfg.annualization, "walkforward");
    return out;
}

}  // namespace rlt
