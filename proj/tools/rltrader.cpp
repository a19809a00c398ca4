#include <iostream>

#include "CLI11.hpp"
#include "rlt/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"rltrader - walk-forward RL trading engine"};
    app.require_subcommand(1);

    // validate
    std::string data_path;
    auto* validate = app.add_subcommand("validate", "check an OHLC csv file");
    validate->add_option("data", data_path, "csv path")->required();

    // run
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::size_t> jobs;
    auto* run = app.add_subcommand("run", "train and evaluate per the config");
    run->add_option("--config", config_path, "json run config")->required();
    run->add_option("--seed", seed, "master seed override");
    run->add_option("--out", out_dir, "output directory override");
    run->add_option("--jobs", jobs, "parallel windows");

    // report
    std::string run_root;
    auto* report = app.add_subcommand("report", "combine completed runs into one table");
    report->add_option("runs", run_root, "run directory (or parent of several)")->required();

    // synth: generate example data so runs work without shipping market data
    std::string synth_out = "synthetic.csv";
    std::string synth_kind = "walk";
    std::string synth_start = "2005-01-01";
    std::size_t synth_bars = 5000;
    double synth_drift = 0.0002, synth_vol = 0.01;
    std::size_t synth_regime = 60;
    std::uint64_t synth_seed = 7;
    auto* synth = app.add_subcommand("synth", "write a synthetic OHLC csv");
    synth->add_option("--out", synth_out, "output csv path");
    synth->add_option("--kind", synth_kind, "walk | regimes")
        ->check(CLI::IsMember({"walk", "regimes"}));
    synth->add_option("--start", synth_start, "first bar date (YYYY-MM-DD)");
    synth->add_option("--bars", synth_bars, "bar count");
    synth->add_option("--drift", synth_drift, "per-bar drift");
    synth->add_option("--vol", synth_vol, "per-bar volatility / noise");
    synth->add_option("--regime-bars", synth_regime, "bars per drift regime");
    synth->add_option("--seed", synth_seed, "generator seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate) return rlt::cmd_validate(data_path, std::cout);
        if (*run) return rlt::cmd_run(config_path, seed, out_dir, jobs, std::cout);
        if (*report) return rlt::cmd_report(run_root, std::cout);
        if (*synth) {
            const rlt::Date start = rlt::Date::parse(synth_start);
            rlt::MarketSeries series =
                synth_kind == "walk"
                    ? rlt::synthetic_walk(start, synth_bars, synth_drift, synth_vol, synth_seed)
                    : rlt::synthetic_regimes(start, synth_bars, synth_drift, synth_vol,
                                             synth_regime, synth_seed);
            rlt::save_csv(synth_out, series);
            std::cout << "wrote " << series.size() << " bars to " << synth_out << "\n";
            return rlt::kOk;
        }
    } catch (const rlt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return rlt::kConfigFailure;
    } catch (const rlt::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return rlt::kDataFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return rlt::kRuntimeFailure;
    }
    return rlt::kOk;
}
