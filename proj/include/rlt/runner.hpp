#pragma once

#include <optional>
#include <ostream>
#include <string>

#include "json.hpp"
#include "rlt/walkforward.hpp"

namespace rlt {

// Distinct exit codes per failure class.
enum ExitCode : int {
    kOk = 0,
    kConfigFailure = 2,
    kDataFailure = 3,
    kRuntimeFailure = 4,
};

struct RunConfig {
    std::string asset;
    std::string data_path;
    std::string output_dir;
    std::uint64_t seed = 1;

    std::string agent_kind = "ppo";  // ddqn | ppo | none (benchmarks only)
    std::string net_kind = "dense";  // dense | transformer
    nlohmann::json agent_params;     // kind-specific hyperparameters

    double gamma = 0.75;
    EnvConfig env;
    FeatureSpec features;
    AnnualizationConfig annualization;

    Date train_start{2005, 1, 1};
    int first_validation_year = 2018;
    std::size_t window_count = 5;
    TrainingConfig training;
    SelectionPolicy selection;
    std::size_t jobs = 1;

    static RunConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

AgentFactory make_agent_factory(const RunConfig& cfg);

std::string sha256_file(const std::string& path);

// writes an SVG line chart of (timestamp, value) pairs
void write_svg_line(const std::string& path, const std::string& title,
                    const std::vector<Date>& ts, const std::vector<double>& values);

int cmd_validate(const std::string& data_path, std::ostream& out);
int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed_override,
            std::optional<std::string> out_override, std::optional<std::size_t> jobs_override,
            std::ostream& log);
int cmd_report(const std::string& run_root, std::ostream& out);

}  // namespace rlt
