// obs_sim: command-line driver for the OBS deflection-routing simulator.

#include "obs/batch.hpp"
#include "obs/config.hpp"
#include "obs/simulator.hpp"
#include "obs/sweep.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kOutDirEnv = "OBS_SIM_OUT_DIR";

struct CommonArgs {
    std::string config_path;
    std::optional<std::string> topology;
    std::optional<std::string> scheme;
    std::optional<double> load;
    std::optional<std::uint64_t> seed;
    std::optional<double> duration;
    std::optional<double> warmup;
    std::vector<std::string> sets;
    std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool with_scheme, bool with_load, bool with_seed) {
    cmd->add_option("--config", a.config_path, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--topology", a.topology, "nsfnet | cost239 | topology JSON file");
    if (with_scheme) cmd->add_option("--scheme", a.scheme, "ahdr | mlhdr | retransmit | deflect");
    if (with_load) cmd->add_option("--load", a.load, "offered load in (0,1]");
    if (with_seed) cmd->add_option("--seed", a.seed, "RNG seed");
    cmd->add_option("--duration", a.duration, "simulated seconds");
    cmd->add_option("--warmup", a.warmup, "warm-up seconds excluded from metrics");
    cmd->add_option("--set", a.sets, "override any config key, KEY=VALUE (repeatable)");
    cmd->add_option("--out", a.out, std::string("output CSV path (default: $") + kOutDirEnv + "/<command>.csv, else stdout)");
}

/// defaults < config file < --set < dedicated flags
obs::SimConfig resolve(const CommonArgs& a) {
    obs::SimConfig cfg;
    if (!a.config_path.empty()) cfg = obs::load_config_file(a.config_path, cfg);

    json overrides = json::object();
    for (const std::string& s : a.sets) {
        auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw obs::ConfigError(s, "--set expects KEY=VALUE");
        std::string key = s.substr(0, eq);
        std::string value = s.substr(eq + 1);
        json parsed = json::parse(value, nullptr, false);
        overrides[key] = parsed.is_discarded() ? json(value) : parsed;
    }
    if (a.topology) overrides["topology"] = *a.topology;
    if (a.scheme) overrides["scheme"] = *a.scheme;
    if (a.load) overrides["load"] = *a.load;
    if (a.seed) overrides["seed"] = *a.seed;
    if (a.duration) overrides["duration"] = *a.duration;
    if (a.warmup) overrides["warmup"] = *a.warmup;
    cfg = obs::apply_config_json(cfg, overrides.dump());
    cfg.validate();
    return cfg;
}

/// Output target: an explicit --out, else $OBS_SIM_OUT_DIR/<name>.csv, else stdout.
class Output {
public:
    Output(const std::string& out, const std::string& name) {
        if (!out.empty()) {
            path_ = out;
        } else if (const char* dir = std::getenv(kOutDirEnv); dir && *dir) {
            path_ = fs::path(dir) / (name + ".csv");
        }
        if (path_) {
            if (path_->has_parent_path()) fs::create_directories(path_->parent_path());
            file_.open(*path_);
            if (!file_) throw std::runtime_error("cannot write '" + path_->string() + "'");
        }
    }

    std::ostream& stream() { return path_ ? static_cast<std::ostream&>(file_) : std::cout; }

    /// Writes the resolved settings next to the CSV as <stem>.config.json.
    void echo_config(const json& doc) {
        if (!path_) return;
        fs::path p = *path_;
        p.replace_extension(".config.json");
        std::ofstream out(p);
        out << doc.dump(2) << '\n';
    }

    void finish() {
        if (!path_) return;
        file_.close();
        if (!file_) throw std::runtime_error("error writing '" + path_->string() + "'");
        std::cerr << "wrote " << path_->string() << '\n';
    }

private:
    std::optional<fs::path> path_;
    std::ofstream file_;
};

int cmd_run(const CommonArgs& a, const std::string& trace_path) {
    obs::SimConfig cfg = resolve(a);
    Output out(a.out, "run");

    obs::RunOptions opt;
    opt.keep_samples = false;
    std::ofstream trace;
    if (!trace_path.empty()) {
        trace.open(trace_path);
        if (!trace) throw std::runtime_error("cannot write trace '" + trace_path + "'");
        opt.trace = &trace;
    }

    obs::SimMetrics m = obs::run(cfg, opt);
    obs::write_runs_csv_header(out.stream());
    obs::write_runs_csv_row(out.stream(), m);
    out.echo_config(json::parse(obs::config_to_json(cfg)));
    out.finish();
    return 0;
}

struct Grids {
    std::vector<std::string> schemes{"ahdr", "mlhdr"};
    std::vector<double> loads{0.2, 0.5, 0.8};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::vector<double> thresholds{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::vector<double> beta_blr{0.0, 0.2, 0.4};
    std::vector<double> beta_u{0.0, 0.2, 0.4};
};

int cmd_compare(const CommonArgs& a, const Grids& g) {
    obs::SimConfig base = resolve(a);
    std::vector<obs::SimConfig> cells;
    for (const std::string& s : g.schemes) {
        for (double load : g.loads) {
            for (std::uint64_t seed : g.seeds) {
                obs::SimConfig c = base;
                c.policy.scheme = obs::parse_scheme(s);
                c.load = load;
                c.seed = seed;
                c.validate();
                cells.push_back(std::move(c));
            }
        }
    }
    Output out(a.out, "compare");
    auto runs = obs::run_batch(cells);
    obs::write_runs_csv_header(out.stream());
    for (const auto& m : runs) obs::write_runs_csv_row(out.stream(), m);
    for (const auto& agg : obs::aggregate_runs(runs)) obs::write_aggregate_csv_row(out.stream(), agg);

    json doc;
    doc["base"] = json::parse(obs::config_to_json(base));
    doc["schemes"] = g.schemes;
    doc["loads"] = g.loads;
    doc["seeds"] = g.seeds;
    out.echo_config(doc);
    out.finish();
    return 0;
}

int cmd_sweep_threshold(const CommonArgs& a, const Grids& g) {
    obs::SimConfig base = resolve(a);
    Output out(a.out, "sweep_threshold");
    auto result = obs::threshold_sweep(base, base.load, g.thresholds, g.seeds);
    obs::write_threshold_sweep_csv(out.stream(), result);
    std::cerr << "best threshold " << obs::format_double(result.best_threshold) << '\n';

    json doc;
    doc["base"] = json::parse(obs::config_to_json(base));
    doc["thresholds"] = g.thresholds;
    doc["seeds"] = g.seeds;
    out.echo_config(doc);
    out.finish();
    return 0;
}

int cmd_sweep_weights(const CommonArgs& a, const Grids& g) {
    obs::SimConfig base = resolve(a);
    std::vector<obs::ThresholdWeights> grid;
    for (double b : g.beta_blr) {
        for (double u : g.beta_u) grid.push_back(obs::ThresholdWeights{b, u});
    }
    for (const auto& w : grid) {
        if (w.beta_blr + w.beta_u > 1.0 + 1e-9) {
            throw obs::ConfigError("beta_blr + beta_u", "grid point (" + obs::format_double(w.beta_blr) + ", " +
                                                           obs::format_double(w.beta_u) + ") exceeds 1");
        }
    }
    Output out(a.out, "sweep_weights");
    auto result = obs::weight_sweep(base, grid, g.seeds);
    obs::write_weight_sweep_csv(out.stream(), result);

    json doc;
    doc["base"] = json::parse(obs::config_to_json(base));
    doc["beta_blr"] = g.beta_blr;
    doc["beta_u"] = g.beta_u;
    doc["seeds"] = g.seeds;
    out.echo_config(doc);
    out.finish();
    return 0;
}

int cmd_validate(const CommonArgs& a) {
    obs::SimConfig cfg = resolve(a);
    std::cout << obs::config_to_json(cfg) << '\n';
    return 0;
}

std::string key_table() {
    std::ostringstream os;
    os << "\nConfig keys (JSON file or --set KEY=VALUE; times in seconds):\n";
    for (const auto& d : obs::config_key_docs()) {
        os << "  " << d.key << std::string(d.key.size() < 22 ? 22 - d.key.size() : 1, ' ') << "default "
           << d.default_value << "\n      " << d.description << '\n';
    }
    os << "\nEnvironment: " << kOutDirEnv << " sets the default output directory.\n";
    return os.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete-event OBS simulator with adaptive and static deflection routing"};
    app.footer(key_table());
    app.require_subcommand(1);

    CommonArgs args;
    Grids grids;
    std::string trace_path;

    auto* run = app.add_subcommand("run", "run one simulation and write one CSV row");
    add_common(run, args, true, true, true);
    run->add_option("--trace", trace_path, "write the control-event log to this file");

    auto* compare = app.add_subcommand("compare", "full-factorial schemes x loads x seeds with per-cell aggregates");
    add_common(compare, args, false, false, false);
    compare->add_option("--schemes", grids.schemes, "comma-separated schemes")->delimiter(',')->capture_default_str();
    compare->add_option("--loads", grids.loads, "comma-separated loads")->delimiter(',')->capture_default_str();
    compare->add_option("--seeds", grids.seeds, "comma-separated seeds")->delimiter(',')->capture_default_str();

    auto* sweep_t = app.add_subcommand("sweep-threshold", "AHDR BLR against a pinned decision threshold");
    add_common(sweep_t, args, false, true, false);
    sweep_t->add_option("--thresholds", grids.thresholds, "comma-separated thresholds")
        ->delimiter(',')
        ->capture_default_str();
    sweep_t->add_option("--seeds", grids.seeds, "comma-separated seeds")->delimiter(',')->capture_default_str();

    auto* sweep_w = app.add_subcommand("sweep-weights", "AHDR BLR over the threshold weight grid");
    add_common(sweep_w, args, false, true, false);
    sweep_w->add_option("--beta-blr", grids.beta_blr, "comma-separated beta_blr values")
        ->delimiter(',')
        ->capture_default_str();
    sweep_w->add_option("--beta-u", grids.beta_u, "comma-separated beta_u values")->delimiter(',')->capture_default_str();
    sweep_w->add_option("--seeds", grids.seeds, "comma-separated seeds")->delimiter(',')->capture_default_str();

    auto* validate = app.add_subcommand("validate-config", "resolve and print the configuration");
    add_common(validate, args, true, true, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(args, trace_path);
        if (compare->parsed()) return cmd_compare(args, grids);
        if (sweep_t->parsed()) return cmd_sweep_threshold(args, grids);
        if (sweep_w->parsed()) return cmd_sweep_weights(args, grids);
        if (validate->parsed()) return cmd_validate(args);
    } catch (const obs::ConfigError& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
