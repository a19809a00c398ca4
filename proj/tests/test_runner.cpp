#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "rlt/runner.hpp"

namespace fs = std::filesystem;
using rlt::Date;
using rlt::RunConfig;

namespace {

fs::path scratch_dir() {
    const fs::path p = fs::temp_directory_path() / "rlt_runner_tests";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// small data set covering 2005-01-01 through the given year end
void write_market_csv(const fs::path& p, int last_year, std::uint64_t seed) {
    const Date start{2005, 1, 1};
    const Date stop{last_year, 12, 31};
    const auto bars = static_cast<std::size_t>(stop.to_days() - start.to_days() + 1);
    rlt::save_csv(p.string(), rlt::synthetic_walk(start, bars, 0.0002, 0.008, seed));
}

nlohmann::json tiny_config(const fs::path& data, const fs::path& out_dir) {
    nlohmann::json j;
    j["asset"] = "synth";
    j["data"] = data.string();
    j["output_dir"] = out_dir.string();
    j["seed"] = 5;
    j["agent"] = {{"kind", "ppo"},    {"net", "dense"},     {"gamma", 0.75},
                  {"hidden_width", 8}, {"hidden_layers", 1}, {"horizon", 64},
                  {"minibatch", 16}};
    j["env"] = {{"lookback", 5}};
    j["features"] = {{"rsi_period", 5}, {"sma_periods", {5}},  {"ema_periods", {5}},
                     {"atr_period", 5}, {"macd_fast", 3},      {"macd_slow", 6},
                     {"macd_signal", 4}};
    j["walkforward"] = {{"first_validation_year", 2017},
                        {"windows", 1},
                        {"cycles", 2},
                        {"episodes_per_cycle", 1},
                        {"subset_bars", 120}};
    return j;
}

}  // namespace

TEST_CASE("config defaults from a minimal document") {
    const auto c = RunConfig::from_json({{"asset", "eurusd"}, {"data", "d.csv"}});
    CHECK(c.output_dir == "out/eurusd");
    CHECK(c.seed == 1);
    CHECK(c.agent_kind == "ppo");
    CHECK(c.net_kind == "dense");
    CHECK(c.gamma == 0.75);
    CHECK(c.env.lookback >= 1);
    CHECK(c.train_start == Date{2005, 1, 1});
    CHECK(c.first_validation_year == 2018);
    CHECK(c.window_count == 5);
    CHECK(c.jobs == 1);
}

TEST_CASE("config rejects invalid fields") {
    nlohmann::json base = {{"asset", "x"}, {"data", "d.csv"}};
    CHECK_THROWS_AS(RunConfig::from_json({}), nlohmann::json::exception);

    auto j = base;
    j["agent"] = {{"kind", "sarsa"}};
    CHECK_THROWS_AS(RunConfig::from_json(j), rlt::ConfigError);
    j = base;
    j["agent"] = {{"net", "cnn"}};
    CHECK_THROWS_AS(RunConfig::from_json(j), rlt::ConfigError);
    j = base;
    j["agent"] = {{"gamma", 1.0}};
    CHECK_THROWS_AS(RunConfig::from_json(j), rlt::ConfigError);
    j = base;
    j["env"] = {{"lookback", 0}};
    CHECK_THROWS_AS(RunConfig::from_json(j), rlt::ConfigError);
    j = base;
    j["annualization"] = -1.0;
    CHECK_THROWS_AS(RunConfig::from_json(j), rlt::ConfigError);
}

TEST_CASE("config survives a serialization round trip") {
    auto j = tiny_config("data.csv", "out");
    const auto a = RunConfig::from_json(j);
    const auto b = RunConfig::from_json(a.to_json());
    CHECK(b.asset == a.asset);
    CHECK(b.data_path == a.data_path);
    CHECK(b.seed == a.seed);
    CHECK(b.agent_kind == a.agent_kind);
    CHECK(b.net_kind == a.net_kind);
    CHECK(b.gamma == a.gamma);
    CHECK(b.env.lookback == a.env.lookback);
    CHECK(b.features.rsi_period == a.features.rsi_period);
    CHECK(b.features.sma_periods == a.features.sma_periods);
    CHECK(b.first_validation_year == a.first_validation_year);
    CHECK(b.window_count == a.window_count);
    CHECK(b.training.subset_bars == a.training.subset_bars);
    CHECK(b.agent_params.value("hidden_width", std::size_t{0}) == 8);
}

TEST_CASE("sha256 of a known vector") {
    const auto dir = scratch_dir();
    write_file(dir / "abc.txt", "abc");
    CHECK(rlt::sha256_file((dir / "abc.txt").string()) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK_THROWS_AS(rlt::sha256_file((dir / "missing").string()), rlt::DataError);
}

TEST_CASE("svg chart writer emits a polyline") {
    const auto dir = scratch_dir();
    const fs::path p = dir / "chart.svg";
    rlt::write_svg_line(p.string(), "demo", {{2020, 1, 1}, {2020, 1, 2}, {2020, 1, 3}},
                        {1.0, 2.0, 1.5});
    const std::string svg = slurp(p);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK(svg.find("demo") != std::string::npos);
}

TEST_CASE("validate command distinguishes clean and broken files") {
    const auto dir = scratch_dir();
    const fs::path good = dir / "good.csv";
    write_market_csv(good, 2006, 3);
    std::ostringstream log;
    CHECK(rlt::cmd_validate(good.string(), log) == rlt::kOk);
    CHECK(log.str().find("0 violations") != std::string::npos);

    const fs::path bad = dir / "bad.csv";
    write_file(bad, "timestamp,open,high,low,close\n2020-01-02,1,2,3,1.5\n");
    std::ostringstream log2;
    CHECK(rlt::cmd_validate(bad.string(), log2) == rlt::kDataFailure);
    CHECK(log2.str().find("violation") != std::string::npos);
}

TEST_CASE("run command maps failure classes to exit codes") {
    const auto dir = scratch_dir();
    std::ostringstream log;

    CHECK(rlt::cmd_run((dir / "missing.json").string(), {}, {}, {}, log) == rlt::kConfigFailure);

    const fs::path bad_cfg = dir / "bad.json";
    write_file(bad_cfg, R"({"asset":"x","data":"d.csv","agent":{"kind":"sarsa"}})");
    CHECK(rlt::cmd_run(bad_cfg.string(), {}, {}, {}, log) == rlt::kConfigFailure);

    const fs::path no_data = dir / "no_data.json";
    write_file(no_data, tiny_config(dir / "absent.csv", dir / "out").dump());
    CHECK(rlt::cmd_run(no_data.string(), {}, {}, {}, log) == rlt::kDataFailure);

    // data present but ending before the configured test year
    const fs::path short_csv = dir / "short.csv";
    write_market_csv(short_csv, 2016, 3);
    const fs::path short_cfg = dir / "short.json";
    write_file(short_cfg, tiny_config(short_csv, dir / "out_short").dump());
    CHECK(rlt::cmd_run(short_cfg.string(), {}, {}, {}, log) == rlt::kDataFailure);
}

TEST_CASE("run command produces the full artifact set, report merges it") {
    const auto dir = scratch_dir();
    const fs::path csv = dir / "market.csv";
    write_market_csv(csv, 2018, 3);
    const fs::path cfg_path = dir / "run.json";
    const fs::path out_dir = dir / "runs" / "ppo";
    write_file(cfg_path, tiny_config(csv, out_dir).dump());

    std::ostringstream log;
    REQUIRE(rlt::cmd_run(cfg_path.string(), {}, {}, {}, log) == rlt::kOk);

    for (const char* name : {"manifest.json", "report.csv", "report.json", "equity.csv",
                             "drawdown.csv", "balance.svg", "drawdown.svg"})
        CHECK(fs::exists(out_dir / name));
    CHECK(fs::exists(out_dir / "windows" / "window_2018.json"));

    const auto manifest = nlohmann::json::parse(slurp(out_dir / "manifest.json"));
    CHECK(manifest.at("status") == "complete");
    CHECK(manifest.at("strategy") == "ppo-dense");
    CHECK(manifest.at("data_sha256").get<std::string>().size() == 64);
    CHECK(manifest.at("selected_generations").size() == 1);

    const std::string report = slurp(out_dir / "report.csv");
    CHECK(report.find("ppo-dense") != std::string::npos);
    CHECK(report.find("buy_and_hold") != std::string::npos);
    CHECK(report.find("perfect_annual") != std::string::npos);

    // a seed override lands in the manifest
    const fs::path out2 = dir / "runs" / "ppo_seed9";
    REQUIRE(rlt::cmd_run(cfg_path.string(), 9, out2.string(), {}, log) == rlt::kOk);
    CHECK(nlohmann::json::parse(slurp(out2 / "manifest.json")).at("seed") == 9);

    std::ostringstream report_log;
    CHECK(rlt::cmd_report((dir / "runs").string(), report_log) == rlt::kOk);
    const std::string combined = slurp(dir / "runs" / "combined_report.csv");
    // two agent rows, benchmarks included exactly once
    CHECK(std::count(combined.begin(), combined.end(), '\n') == 5);
    CHECK(combined.find("buy_and_hold") == combined.rfind("buy_and_hold"));

    std::ostringstream empty_log;
    CHECK(rlt::cmd_report((dir / "nowhere").string(), empty_log) == rlt::kDataFailure);
}
