#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "rlt/agent.hpp"
#include "rlt/benchmarks.hpp"
#include "rlt/metrics.hpp"

namespace rlt {

struct ScheduleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Anchored train span, one validation year, one out-of-sample test year.
struct WindowSpec {
    Date train_begin;
    int train_end_year = 0;  // inclusive
    int validation_year = 0;
    int test_year = 0;
};

struct WindowSchedule {
    std::vector<WindowSpec> windows;
};

// Window k trains on [train_start, first_val_year + k - 2], validates on
// first_val_year + k - 1 and tests the following year.
WindowSchedule build_schedule(const Date& train_start, int first_validation_year,
                              std::size_t window_count);

struct GenerationRecord {
    std::size_t index = 0;  // training-cycle counter
    std::optional<double> validation_sharpe;
    double validation_balance = 0.0;
};

struct SelectionPolicy {
    double min_generation_fraction = 0.5;
    std::size_t neighbor_radius = 2;
};

struct SelectionResult {
    std::size_t chosen_index = 0;
    std::vector<std::optional<double>> neighbor_sharpes;  // 2*radius+1, absent padded
    bool robustness_warning = false;  // chosen metric > 2x both neighbors
};

// Deterministic pick: best validation Sharpe among generations past the
// minimum fraction of training; ties resolve to the lower index.
SelectionResult select_generation(const std::vector<GenerationRecord>& records,
                                  const SelectionPolicy& policy);

struct TrainingConfig {
    std::size_t cycles = 40;            // generations per window
    std::size_t episodes_per_cycle = 4;
    std::size_t subset_bars = 260;      // contiguous training-slice length
};

using AgentFactory = std::function<std::unique_ptr<Agent>(std::size_t feature_count, Rng& rng)>;

struct WindowResult {
    WindowSpec spec;
    std::vector<GenerationRecord> generations;
    SelectionResult selection;
    PerformanceReport test_report;
    Rollout test_rollout;
};

struct WalkforwardResult {
    EquityCurve stitched;
    std::vector<WindowResult> windows;
    PerformanceReport aggregate;
};

struct WalkforwardConfig {
    EnvConfig env;
    AnnualizationConfig annualization;
    TrainingConfig training;
    SelectionPolicy selection;
    std::uint64_t master_seed = 1;
    std::size_t jobs = 1;
};

// Trains a fresh agent per window on seeded contiguous train subsets,
// records one generation per cycle, selects by validation Sharpe and chains
// the out-of-sample test segments into one equity history.
WalkforwardResult run_walkforward(const MarketSeries& series, const FeatureSpec& features,
                                  const WindowSchedule& schedule, const AgentFactory& factory,
                                  const WalkforwardConfig& cfg);

// Exposed for tests: one window's full train/select/test pass.
WindowResult run_window(const FeatureFrame& raw_frame, const WindowSpec& window,
                        const AgentFactory& factory, const WalkforwardConfig& cfg,
                        std::uint64_t window_seed);

}  // namespace rlt
