#include "obs/config.hpp"

#include <json.hpp>

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace obs {

using nlohmann::json;

namespace {

double number(const json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError(key, "expected a number");
    return v.get<double>();
}

std::uint64_t integer(const json& v, const std::string& key) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw ConfigError(key, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

std::string text(const json& v, const std::string& key) {
    if (!v.is_string()) throw ConfigError(key, "expected a string");
    return v.get<std::string>();
}

bool boolean(const json& v, const std::string& key) {
    if (!v.is_boolean()) throw ConfigError(key, "expected true or false");
    return v.get<bool>();
}

Duration seconds(const json& v, const std::string& key) { return from_seconds(number(v, key)); }

template <typename F>
auto rethrow_as(const std::string& key, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(key, e.what());
    }
}

using Setter = std::function<void(SimConfig&, const json&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"topology", [](SimConfig& c, const json& v, const std::string& k) { c.topology = text(v, k); }},
        {"scheme",
         [](SimConfig& c, const json& v, const std::string& k) {
             c.policy.scheme = rethrow_as(k, [&] { return parse_scheme(text(v, k)); });
         }},
        {"mlhdr_max_deflections",
         [](SimConfig& c, const json& v, const std::string& k) {
             c.policy.max_deflections_per_burst = static_cast<std::uint32_t>(integer(v, k));
         }},
        {"alpha_blr", [](SimConfig& c, const json& v, const std::string& k) { c.dp_weights.alpha_blr = number(v, k); }},
        {"alpha_u", [](SimConfig& c, const json& v, const std::string& k) { c.dp_weights.alpha_u = number(v, k); }},
        {"beta_blr",
         [](SimConfig& c, const json& v, const std::string& k) { c.threshold_weights.beta_blr = number(v, k); }},
        {"beta_u", [](SimConfig& c, const json& v, const std::string& k) { c.threshold_weights.beta_u = number(v, k); }},
        {"pinned_threshold",
         [](SimConfig& c, const json& v, const std::string& k) {
             if (v.is_null()) c.pinned_threshold.reset();
             else c.pinned_threshold = number(v, k);
         }},
        {"xi", [](SimConfig& c, const json& v, const std::string& k) { c.xi = number(v, k); }},
        {"t_conf", [](SimConfig& c, const json& v, const std::string& k) { c.offset.t_conf = seconds(v, k); }},
        {"t_p", [](SimConfig& c, const json& v, const std::string& k) { c.offset.t_p = seconds(v, k); }},
        {"n_ret",
         [](SimConfig& c, const json& v, const std::string& k) { c.n_ret = static_cast<std::uint32_t>(integer(v, k)); }},
        {"retransmit_idle_max",
         [](SimConfig& c, const json& v, const std::string& k) { c.retransmit_idle_max = seconds(v, k); }},
        {"stats_window", [](SimConfig& c, const json& v, const std::string& k) { c.stats_window = seconds(v, k); }},
        {"update_period", [](SimConfig& c, const json& v, const std::string& k) { c.update_period = seconds(v, k); }},
        {"load", [](SimConfig& c, const json& v, const std::string& k) { c.load = number(v, k); }},
        {"mean_burst_size",
         [](SimConfig& c, const json& v, const std::string& k) {
             if (v.is_null()) c.mean_burst_size.reset();
             else c.mean_burst_size = number(v, k);
         }},
        {"burst_size_law",
         [](SimConfig& c, const json& v, const std::string& k) {
             c.burst_size_law = rethrow_as(k, [&] { return parse_burst_size_law(text(v, k)); });
         }},
        {"random_generators",
         [](SimConfig& c, const json& v, const std::string& k) { c.random_generators = boolean(v, k); }},
        {"generator_count",
         [](SimConfig& c, const json& v, const std::string& k) {
             c.generator_count = static_cast<std::uint32_t>(integer(v, k));
         }},
        {"duration", [](SimConfig& c, const json& v, const std::string& k) { c.duration = seconds(v, k); }},
        {"warmup",
         [](SimConfig& c, const json& v, const std::string& k) {
             if (v.is_null()) c.warmup.reset();
             else c.warmup = seconds(v, k);
         }},
        {"seed", [](SimConfig& c, const json& v, const std::string& k) { c.seed = integer(v, k); }},
    };
    return table;
}

} // namespace

double SimConfig::resolved_mean_burst_size() const {
    if (mean_burst_size) return *mean_burst_size;
    return topology == "cost239" ? 4'000'000.0 : 400'000.0;
}

Duration SimConfig::resolved_warmup() const { return warmup ? *warmup : duration / 10; }

void SimConfig::validate() const {
    if (topology.empty()) throw ConfigError("topology", "must not be empty");
    rethrow_as("alpha_blr", [&] {
        dp_weights.validate();
        return 0;
    });
    rethrow_as("beta_blr", [&] {
        threshold_weights.validate();
        return 0;
    });
    if (pinned_threshold && !(*pinned_threshold >= 0.0)) throw ConfigError("pinned_threshold", "must be >= 0");
    if (!(xi >= 1.0)) throw ConfigError("xi", "must be >= 1");
    if (offset.t_conf < Duration::zero()) throw ConfigError("t_conf", "must be >= 0");
    if (offset.t_p < Duration::zero()) throw ConfigError("t_p", "must be >= 0");
    if (retransmit_idle_max < Duration::zero()) throw ConfigError("retransmit_idle_max", "must be >= 0");
    if (stats_window <= Duration::zero()) throw ConfigError("stats_window", "must be > 0");
    if (update_period <= Duration::zero()) throw ConfigError("update_period", "must be > 0");
    if (!(load > 0.0 && load <= 1.0)) throw ConfigError("load", "must be in (0,1], got " + std::to_string(load));
    if (!(resolved_mean_burst_size() > 0.0)) throw ConfigError("mean_burst_size", "must be > 0");
    if (random_generators && generator_count == 0) throw ConfigError("generator_count", "must be >= 1");
    if (duration < Duration::zero()) throw ConfigError("duration", "must be >= 0");
    Duration w = resolved_warmup();
    if (w < Duration::zero()) throw ConfigError("warmup", "must be >= 0");
    if (duration > Duration::zero() && !(duration > w)) throw ConfigError("warmup", "must be smaller than duration");
    if (duration == Duration::zero() && w != Duration::zero()) throw ConfigError("warmup", "must be 0 when duration is 0");
}

SimConfig apply_config_json(SimConfig base, std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", e.what());
    }
    if (!doc.is_object()) throw ConfigError("<file>", "top level must be an object");
    const auto& table = setters();
    for (const auto& [key, value] : doc.items()) {
        auto it = table.find(key);
        if (it == table.end()) throw ConfigError(key, "unknown key");
        it->second(base, value, key);
    }
    return base;
}

SimConfig load_config_file(const std::filesystem::path& path, SimConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return apply_config_json(std::move(base), buf.str());
}

std::string config_to_json(const SimConfig& c) {
    json j = json::object();
    j["topology"] = c.topology;
    j["scheme"] = std::string(to_string(c.policy.scheme));
    j["mlhdr_max_deflections"] = c.policy.max_deflections_per_burst;
    j["alpha_blr"] = c.dp_weights.alpha_blr;
    j["alpha_u"] = c.dp_weights.alpha_u;
    j["beta_blr"] = c.threshold_weights.beta_blr;
    j["beta_u"] = c.threshold_weights.beta_u;
    j["pinned_threshold"] = c.pinned_threshold ? json(*c.pinned_threshold) : json(nullptr);
    j["xi"] = c.xi;
    j["t_conf"] = to_seconds(c.offset.t_conf);
    j["t_p"] = to_seconds(c.offset.t_p);
    j["n_ret"] = c.n_ret;
    j["retransmit_idle_max"] = to_seconds(c.retransmit_idle_max);
    j["stats_window"] = to_seconds(c.stats_window);
    j["update_period"] = to_seconds(c.update_period);
    j["load"] = c.load;
    j["mean_burst_size"] = c.resolved_mean_burst_size();
    j["burst_size_law"] = std::string(to_string(c.burst_size_law));
    j["random_generators"] = c.random_generators;
    j["generator_count"] = c.generator_count;
    j["duration"] = to_seconds(c.duration);
    j["warmup"] = to_seconds(c.resolved_warmup());
    j["seed"] = c.seed;
    return j.dump(2);
}

std::vector<ConfigKeyDoc> config_key_docs() {
    const SimConfig d;
    auto num = [](double v) {
        std::ostringstream os;
        os << v;
        return os.str();
    };
    return {
        {"topology", d.topology, "nsfnet | cost239 | path to a topology JSON file"},
        {"scheme", std::string(to_string(d.policy.scheme)), "ahdr | mlhdr | retransmit | deflect"},
        {"mlhdr_max_deflections", num(d.policy.max_deflections_per_burst), "MLHDR deflections per burst lifetime"},
        {"alpha_blr", num(d.dp_weights.alpha_blr), "dropping-probability weight on link BLR"},
        {"alpha_u", num(d.dp_weights.alpha_u), "dropping-probability weight on link utilization (alpha sum = 1)"},
        {"beta_blr", num(d.threshold_weights.beta_blr), "threshold weight on network BLR"},
        {"beta_u", num(d.threshold_weights.beta_u), "threshold weight on network utilization (beta sum <= 1)"},
        {"pinned_threshold", "null", "fixed decision threshold overriding the adaptive one"},
        {"xi", num(d.xi), "deflection route length bound relative to the shortest path"},
        {"t_conf", num(to_seconds(d.offset.t_conf)), "switch configuration time, seconds"},
        {"t_p", num(to_seconds(d.offset.t_p)), "per-hop BHP processing time, seconds"},
        {"n_ret", num(d.n_ret), "retransmissions allowed per burst"},
        {"retransmit_idle_max", num(to_seconds(d.retransmit_idle_max)), "upper bound of the retransmission wait, seconds"},
        {"stats_window", num(to_seconds(d.stats_window)), "link measurement window, seconds"},
        {"update_period", num(to_seconds(d.update_period)), "routing table / threshold refresh period, seconds"},
        {"load", num(d.load), "offered load in (0,1] relative to total data capacity"},
        {"mean_burst_size", "400000 (cost239: 4000000)", "mean burst size, bytes"},
        {"burst_size_law", std::string(to_string(d.burst_size_law)), "exponential | constant"},
        {"random_generators", "false", "place generators on a random subset of nodes"},
        {"generator_count", num(d.generator_count), "subset size when random_generators is true"},
        {"duration", num(to_seconds(d.duration)), "simulated time, seconds"},
        {"warmup", "10% of duration", "initial period excluded from metrics, seconds"},
        {"seed", num(static_cast<double>(d.seed)), "random seed"},
    };
}

} // namespace obs
