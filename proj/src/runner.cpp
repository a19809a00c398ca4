#include "rlt/runner.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "rlt/ddqn.hpp"
#include "rlt/dense_net.hpp"
#include "rlt/ppo.hpp"
#include "rlt/transformer.hpp"

namespace rlt {

namespace fs = std::filesystem;

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig c;
    c.asset = j.at("asset").get<std::string>();
    c.data_path = j.at("data").get<std::string>();
    c.output_dir = j.value("output_dir", std::string("out/") + c.asset);
    c.seed = j.value("seed", std::uint64_t{1});

    if (j.contains("agent")) {
        const auto& a = j.at("agent");
        c.agent_kind = a.value("kind", c.agent_kind);
        c.net_kind = a.value("net", c.net_kind);
        c.gamma = a.value("gamma", c.gamma);
        c.agent_params = a;
    }
    if (c.agent_kind != "ddqn" && c.agent_kind != "ppo" && c.agent_kind != "none")
        throw ConfigError("agent.kind must be ddqn, ppo or none");
    if (c.net_kind != "dense" && c.net_kind != "transformer")
        throw ConfigError("agent.net must be dense or transformer");

    if (j.contains("env")) {
        const auto& e = j.at("env");
        c.env.provision_rate = e.value("provision_rate", c.env.provision_rate);
        c.env.reward_scale = e.value("reward_scale", c.env.reward_scale);
        c.env.lookback = e.value("lookback", c.env.lookback);
        c.env.initial_capital = e.value("initial_capital", c.env.initial_capital);
    }
    if (c.env.provision_rate < 0.0 || c.env.reward_scale <= 0.0 || c.env.lookback < 1)
        throw ConfigError("env: provision_rate >= 0, reward_scale > 0, lookback >= 1 required");
    if (c.gamma < 0.0 || c.gamma >= 1.0) throw ConfigError("agent.gamma must lie in [0,1)");

    if (j.contains("features")) {
        const auto& f = j.at("features");
        c.features.log_return = f.value("log_return", c.features.log_return);
        c.features.ohlc_relatives = f.value("ohlc_relatives", c.features.ohlc_relatives);
        c.features.rsi_period = f.value("rsi_period", c.features.rsi_period);
        c.features.sma_periods = f.value("sma_periods", c.features.sma_periods);
        c.features.ema_periods = f.value("ema_periods", c.features.ema_periods);
        c.features.atr_period = f.value("atr_period", c.features.atr_period);
        c.features.use_macd = f.value("macd", c.features.use_macd);
        c.features.macd_fast = f.value("macd_fast", c.features.macd_fast);
        c.features.macd_slow = f.value("macd_slow", c.features.macd_slow);
        c.features.macd_signal = f.value("macd_signal", c.features.macd_signal);
        c.features.time_encodings = f.value("time_encodings", c.features.time_encodings);
    }
    if (j.contains("annualization"))
        c.annualization.periods_per_year = j.at("annualization").get<double>();
    if (c.annualization.periods_per_year <= 0.0)
        throw ConfigError("annualization must be positive");

    if (j.contains("walkforward")) {
        const auto& w = j.at("walkforward");
        if (w.contains("train_start")) c.train_start = Date::parse(w.at("train_start"));
        c.first_validation_year = w.value("first_validation_year", c.first_validation_year);
        c.window_count = w.value("windows", c.window_count);
        c.training.cycles = w.value("cycles", c.training.cycles);
        c.training.episodes_per_cycle =
            w.value("episodes_per_cycle", c.training.episodes_per_cycle);
        c.training.subset_bars = w.value("subset_bars", c.training.subset_bars);
        c.selection.min_generation_fraction =
            w.value("min_generation_fraction", c.selection.min_generation_fraction);
        c.selection.neighbor_radius = w.value("neighbor_radius", c.selection.neighbor_radius);
    }
    c.jobs = j.value("jobs", c.jobs);
    return c;
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["asset"] = asset;
    j["data"] = data_path;
    j["output_dir"] = output_dir;
    j["seed"] = seed;
    nlohmann::json a = agent_params.is_object() ? agent_params : nlohmann::json::object();
    a["kind"] = agent_kind;
    a["net"] = net_kind;
    a["gamma"] = gamma;
    j["agent"] = a;
    j["env"] = {{"provision_rate", env.provision_rate},
                {"reward_scale", env.reward_scale},
                {"lookback", env.lookback},
                {"initial_capital", env.initial_capital}};
    j["features"] = {{"log_return", features.log_return},
                     {"ohlc_relatives", features.ohlc_relatives},
                     {"rsi_period", features.rsi_period},
                     {"sma_periods", features.sma_periods},
                     {"ema_periods", features.ema_periods},
                     {"atr_period", features.atr_period},
                     {"macd", features.use_macd},
                     {"time_encodings", features.time_encodings}};
    j["annualization"] = annualization.periods_per_year;
    j["walkforward"] = {{"train_start", train_start.iso()},
                        {"first_validation_year", first_validation_year},
                        {"windows", window_count},
                        {"cycles", training.cycles},
                        {"episodes_per_cycle", training.episodes_per_cycle},
                        {"subset_bars", training.subset_bars},
                        {"min_generation_fraction", selection.min_generation_fraction},
                        {"neighbor_radius", selection.neighbor_radius}};
    j["jobs"] = jobs;
    return j;
}

AgentFactory make_agent_factory(const RunConfig& cfg) {
    const nlohmann::json p =
        cfg.agent_params.is_object() ? cfg.agent_params : nlohmann::json::object();
    const std::string net_kind = cfg.net_kind;
    const std::size_t lookback = cfg.env.lookback;

    auto make_net = [net_kind, lookback, p](std::size_t feature_count, std::size_t out,
                                            Rng& rng) -> std::unique_ptr<Network> {
        const double dropout = p.value("dropout", 0.1);
        if (net_kind == "transformer") {
            TransformerConfig tc;
            tc.seq_len = lookback;
            tc.input_dim = feature_count + 3;
            tc.d_model = p.value("d_model", std::size_t{32});
            tc.heads = p.value("heads", std::size_t{2});
            tc.layers = p.value("layers", std::size_t{2});
            tc.ff_dim = p.value("ff_dim", std::size_t{64});
            tc.output_dim = out;
            tc.dropout = dropout;
            return std::make_unique<TransformerNet>(tc, rng);
        }
        DenseNetConfig dc;
        const std::size_t hidden = p.value("hidden_width", std::size_t{64});
        const std::size_t depth = p.value("hidden_layers", std::size_t{2});
        dc.widths.push_back(lookback * feature_count + 3);
        for (std::size_t i = 0; i < depth; ++i) dc.widths.push_back(hidden);
        dc.widths.push_back(out);
        dc.dropout = dropout;
        return std::make_unique<DenseNet>(dc, rng);
    };

    const double gamma = cfg.gamma;
    const std::size_t episode_steps =
        cfg.training.subset_bars > cfg.env.lookback
            ? cfg.training.subset_bars - cfg.env.lookback
            : 1;
    const std::size_t total_steps =
        cfg.training.cycles * cfg.training.episodes_per_cycle * episode_steps;

    if (cfg.agent_kind == "ddqn") {
        return [=](std::size_t feature_count, Rng& rng) -> std::unique_ptr<Agent> {
            DDQNConfig dq;
            dq.gamma = gamma;
            dq.batch_size = p.value("batch_size", std::size_t{64});
            dq.replay_capacity = p.value("replay_capacity", std::size_t{50000});
            dq.target_sync_period = p.value("target_sync_period", std::size_t{500});
            dq.learning_rate = p.value("learning_rate", 1e-4);
            dq.l1 = p.value("l1", 0.0);
            dq.l2 = p.value("l2", 0.0);
            dq.eps_start = p.value("eps_start", 1.0);
            dq.eps_end = p.value("eps_end", 0.05);
            dq.eps_decay_steps = p.value("eps_decay_steps", total_steps / 2);
            return std::make_unique<DDQNAgent>(make_net(feature_count, 3, rng), dq);
        };
    }
    return [=](std::size_t feature_count, Rng& rng) -> std::unique_ptr<Agent> {
        PPOConfig pc;
        pc.gamma = gamma;
        pc.lambda = p.value("lambda", 0.95);
        pc.clip_eps = p.value("clip_eps", 0.2);
        pc.epochs = p.value("epochs", std::size_t{4});
        pc.minibatch = p.value("minibatch", std::size_t{64});
        pc.horizon = p.value("horizon", std::size_t{512});
        pc.value_coef = p.value("value_coef", 0.5);
        pc.entropy_coef = p.value("entropy_coef", 0.0);
        pc.learning_rate = p.value("learning_rate", 1e-4);
        pc.l1 = p.value("l1", 0.0);
        pc.l2 = p.value("l2", 0.0);
        return std::make_unique<PPOAgent>(make_net(feature_count, 3, rng),
                                          make_net(feature_count, 1, rng), pc);
    };
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("sha256: cannot open " + path);
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[65536];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    char h[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(h, sizeof h, "%02x", digest[i]);
        hex += h;
    }
    return hex;
}

void write_svg_line(const std::string& path, const std::string& title,
                    const std::vector<Date>& ts, const std::vector<double>& values) {
    if (values.empty()) return;
    const double w = 960.0, h = 480.0, margin = 60.0;
    double lo = values[0], hi = values[0];
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi == lo) hi = lo + 1.0;
    const double x0 = static_cast<double>(ts.front().to_days());
    const double x1 = static_cast<double>(ts.back().to_days());
    const double xs = x1 > x0 ? (w - 2 * margin) / (x1 - x0) : 1.0;

    std::ofstream out(path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << w / 2 << "' y='24' text-anchor='middle' font-family='sans-serif' "
           "font-size='16'>"
        << title << "</text>\n";
    out << "<line x1='" << margin << "' y1='" << h - margin << "' x2='" << w - margin << "' y2='"
        << h - margin << "' stroke='black'/>\n";
    out << "<line x1='" << margin << "' y1='" << margin << "' x2='" << margin << "' y2='"
        << h - margin << "' stroke='black'/>\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", hi);
    out << "<text x='8' y='" << margin << "' font-family='sans-serif' font-size='11'>" << buf
        << "</text>\n";
    std::snprintf(buf, sizeof buf, "%.4g", lo);
    out << "<text x='8' y='" << h - margin << "' font-family='sans-serif' font-size='11'>" << buf
        << "</text>\n";
    out << "<text x='" << margin << "' y='" << h - margin + 20
        << "' font-family='sans-serif' font-size='11'>" << ts.front().iso() << "</text>\n";
    out << "<text x='" << w - margin << "' y='" << h - margin + 20
        << "' text-anchor='end' font-family='sans-serif' font-size='11'>" << ts.back().iso()
        << "</text>\n";
    out << "<polyline fill='none' stroke='steelblue' stroke-width='1.5' points='";
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double x = margin + (static_cast<double>(ts[i].to_days()) - x0) * xs;
        const double y = h - margin - (values[i] - lo) / (hi - lo) * (h - 2 * margin);
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", x, y);
        out << buf;
    }
    out << "'/>\n</svg>\n";
}

int cmd_validate(const std::string& data_path, std::ostream& out) {
    const auto violations = validate_csv(data_path);
    if (violations.empty()) {
        out << data_path << ": 0 violations\n";
        return kOk;
    }
    for (const auto& v : violations) out << data_path << ":" << v.line << ": " << v.message << "\n";
    out << violations.size() << " violation(s)\n";
    return kDataFailure;
}

namespace {

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string curve_csv(const EquityCurve& curve) {
    std::string s = "timestamp,equity\n";
    for (std::size_t i = 0; i < curve.equity.size(); ++i)
        s += curve.timestamps[i].iso() + "," + fmt17(curve.equity[i]) + "\n";
    return s;
}

std::string drawdown_csv(const EquityCurve& curve, std::vector<double>& dd_out) {
    std::string s = "timestamp,drawdown\n";
    double peak = 0.0;
    dd_out.clear();
    for (std::size_t i = 0; i < curve.equity.size(); ++i) {
        peak = std::max(peak, curve.equity[i]);
        const double dd = curve.equity[i] / peak - 1.0;
        dd_out.push_back(dd);
        s += curve.timestamps[i].iso() + "," + fmt17(dd) + "\n";
    }
    return s;
}

}  // namespace

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed_override,
            std::optional<std::string> out_override, std::optional<std::size_t> jobs_override,
            std::ostream& log) {
    RunConfig cfg;
    try {
        std::ifstream in(config_path);
        if (!in) throw ConfigError("cannot open config: " + config_path);
        nlohmann::json j = nlohmann::json::parse(in);
        cfg = RunConfig::from_json(j);
    } catch (const std::exception& e) {
        log << "config error: " << e.what() << "\n";
        return kConfigFailure;
    }
    if (seed_override) cfg.seed = *seed_override;
    if (out_override) cfg.output_dir = *out_override;
    if (jobs_override) cfg.jobs = *jobs_override;

    MarketSeries series;
    std::string data_hash;
    try {
        series = load_csv(cfg.data_path);
        data_hash = sha256_file(cfg.data_path);
    } catch (const std::exception& e) {
        log << "data error: " << e.what() << "\n";
        return kDataFailure;
    }

    fs::create_directories(cfg.output_dir);
    const fs::path out_dir(cfg.output_dir);
    nlohmann::json manifest;
    manifest["status"] = "incomplete";
    manifest["config"] = cfg.to_json();
    manifest["seed"] = cfg.seed;
    manifest["data_sha256"] = data_hash;
    manifest["strategy"] = cfg.agent_kind == "none"
                               ? "benchmarks"
                               : cfg.agent_kind + "-" + cfg.net_kind;
    write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");

    try {
        const WindowSchedule schedule =
            build_schedule(cfg.train_start, cfg.first_validation_year, cfg.window_count);

        WalkforwardConfig wf;
        wf.env = cfg.env;
        wf.annualization = cfg.annualization;
        wf.training = cfg.training;
        wf.selection = cfg.selection;
        wf.master_seed = cfg.seed;
        wf.jobs = cfg.jobs;

        // benchmarks over the stitched test period
        const FeatureFrame raw_frame = build_features(series, cfg.features);
        const int first_test = schedule.windows.front().test_year;
        const int last_test = schedule.windows.back().test_year;
        std::size_t t0 = 0, t1 = 0;
        {
            const Date b{first_test, 1, 1}, e{last_test, 12, 31};
            while (t0 < raw_frame.rows() && raw_frame.timestamps[t0] < b) ++t0;
            t1 = t0;
            while (t1 < raw_frame.rows() && !(e < raw_frame.timestamps[t1])) ++t1;
        }
        if (t0 < cfg.env.lookback || t1 <= t0)
            throw DataError("data does not cover the test period");
        const Rollout bh = buy_and_hold(raw_frame, t0 - cfg.env.lookback, t1, cfg.env);
        const Rollout pa = perfect_annual(raw_frame, t0 - cfg.env.lookback, t1, cfg.env);
        const PerformanceReport bh_report =
            full_report(bh.curve, bh.trades, bh.positions, cfg.annualization, "buy_and_hold");
        const PerformanceReport pa_report =
            full_report(pa.curve, pa.trades, pa.positions, cfg.annualization, "perfect_annual");

        std::string csv = report_csv_header() + "\n";
        nlohmann::json reports = nlohmann::json::array();

        if (cfg.agent_kind != "none") {
            const AgentFactory factory = make_agent_factory(cfg);
            WalkforwardResult result =
                run_walkforward(series, cfg.features, schedule, factory, wf);
            result.aggregate.strategy = cfg.agent_kind + "-" + cfg.net_kind;

            fs::create_directories(out_dir / "windows");
            nlohmann::json selections = nlohmann::json::array();
            for (const auto& w : result.windows) {
                nlohmann::json wj;
                wj["train_begin"] = w.spec.train_begin.iso();
                wj["train_end_year"] = w.spec.train_end_year;
                wj["validation_year"] = w.spec.validation_year;
                wj["test_year"] = w.spec.test_year;
                wj["selected_generation"] = w.selection.chosen_index;
                wj["robustness_warning"] = w.selection.robustness_warning;
                nlohmann::json gens = nlohmann::json::array();
                for (const auto& g : w.generations)
                    gens.push_back({{"index", g.index},
                                    {"validation_sharpe",
                                     g.validation_sharpe ? nlohmann::json(*g.validation_sharpe)
                                                         : nlohmann::json()},
                                    {"validation_balance", g.validation_balance}});
                wj["generations"] = gens;
                nlohmann::json nbrs = nlohmann::json::array();
                for (const auto& n : w.selection.neighbor_sharpes)
                    nbrs.push_back(n ? nlohmann::json(*n) : nlohmann::json());
                wj["neighbor_sharpes"] = nbrs;
                wj["test_report"] = report_to_json(w.test_report);
                write_text(out_dir / "windows" /
                               ("window_" + std::to_string(w.spec.test_year) + ".json"),
                           wj.dump(2) + "\n");
                selections.push_back(w.selection.chosen_index);
            }
            manifest["selected_generations"] = selections;

            csv += report_csv_row(result.aggregate) + "\n";
            reports.push_back(report_to_json(result.aggregate));

            write_text(out_dir / "equity.csv", curve_csv(result.stitched));
            std::vector<double> dd;
            write_text(out_dir / "drawdown.csv", drawdown_csv(result.stitched, dd));
            write_svg_line((out_dir / "balance.svg").string(), cfg.asset + " balance",
                           result.stitched.timestamps, result.stitched.equity);
            write_svg_line((out_dir / "drawdown.svg").string(), cfg.asset + " drawdown",
                           result.stitched.timestamps, dd);
        } else {
            write_text(out_dir / "equity.csv", curve_csv(bh.curve));
            std::vector<double> dd;
            write_text(out_dir / "drawdown.csv", drawdown_csv(bh.curve, dd));
            write_svg_line((out_dir / "balance.svg").string(), cfg.asset + " buy-and-hold balance",
                           bh.curve.timestamps, bh.curve.equity);
            write_svg_line((out_dir / "drawdown.svg").string(), cfg.asset + " drawdown",
                           bh.curve.timestamps, dd);
        }

        csv += report_csv_row(bh_report) + "\n";
        csv += report_csv_row(pa_report) + "\n";
        reports.push_back(report_to_json(bh_report));
        reports.push_back(report_to_json(pa_report));
        write_text(out_dir / "report.csv", csv);
        write_text(out_dir / "report.json", nlohmann::json(reports).dump(2) + "\n");

        manifest["status"] = "complete";
        write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return kConfigFailure;
    } catch (const DataError& e) {
        log << "data error: " << e.what() << "\n";
        return kDataFailure;
    } catch (const std::exception& e) {
        log << "runtime error: " << e.what() << "\n";
        return kRuntimeFailure;
    }
    log << "run complete: " << cfg.output_dir << "\n";
    return kOk;
}

int cmd_report(const std::string& run_root, std::ostream& out) {
    std::vector<fs::path> runs;
    if (fs::exists(fs::path(run_root) / "manifest.json")) runs.push_back(run_root);
    if (fs::is_directory(run_root))
        for (const auto& entry : fs::directory_iterator(run_root))
            if (entry.is_directory() && fs::exists(entry.path() / "manifest.json"))
                runs.push_back(entry.path());
    std::sort(runs.begin(), runs.end());
    if (runs.empty()) {
        out << "no runs found under " << run_root << "\n";
        return kDataFailure;
    }

    std::string csv = report_csv_header() + "\n";
    nlohmann::json combined = nlohmann::json::array();
    std::vector<std::string> benchmark_rows;
    std::vector<std::string> missing;
    for (const auto& run : runs) {
        std::ifstream mf(run / "manifest.json");
        nlohmann::json manifest = nlohmann::json::parse(mf);
        if (manifest.value("status", "") != "complete") {
            missing.push_back(run.string());
            continue;
        }
        std::ifstream rf(run / "report.json");
        if (!rf) {
            missing.push_back(run.string());
            continue;
        }
        nlohmann::json reports = nlohmann::json::parse(rf);
        std::ifstream cf(run / "report.csv");
        std::string line;
        std::getline(cf, line);  // header
        bool first_bench = benchmark_rows.empty();
        for (const auto& rep : reports) {
            std::getline(cf, line);
            const std::string name = rep.value("strategy", "");
            const bool is_bench = name == "buy_and_hold" || name == "perfect_annual";
            if (is_bench) {
                if (first_bench) {
                    benchmark_rows.push_back(line);
                    combined.push_back(rep);
                }
            } else {
                csv += line + "\n";
                combined.push_back(rep);
            }
        }
    }
    for (const auto& row : benchmark_rows) csv += row + "\n";
    out << csv;
    write_text(fs::path(run_root) / "combined_report.csv", csv);
    write_text(fs::path(run_root) / "combined_report.json", combined.dump(2) + "\n");
    for (const auto& m : missing) out << "incomplete run skipped: " << m << "\n";
    return kOk;
}

}  // namespace rlt
