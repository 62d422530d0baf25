#pragma once

#include "obs/decision.hpp"
#include "obs/protocol.hpp"
#include "obs/traffic.hpp"
#include "obs/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace obs {

/// Everything one simulation run depends on. Equal configs give identical runs.
struct SimConfig {
    std::string topology = "nsfnet"; // nsfnet | cost239 | path to topology file
    SchemePolicy policy{};
    DpWeights dp_weights{};
    ThresholdWeights threshold_weights{};
    /// Bypasses the adaptive threshold when set (threshold sweeps).
    std::optional<double> pinned_threshold;
    double xi = 2.0;
    OffsetParams offset{};
    std::uint32_t n_ret = 1;
    Duration retransmit_idle_max = std::chrono::milliseconds(50);
    Duration stats_window = std::chrono::seconds(1);
    Duration update_period = std::chrono::milliseconds(100);

    double load = 0.5;
    /// Bytes; unset means 400 KB on nsfnet and custom files, 4 MB on cost239.
    std::optional<double> mean_burst_size;
    BurstSizeLaw burst_size_law = BurstSizeLaw::Exponential;
    bool random_generators = false;
    std::uint32_t generator_count = 0; // used when random_generators

    Duration duration = std::chrono::seconds(10);
    /// Unset means 10% of duration.
    std::optional<Duration> warmup;
    std::uint64_t seed = 1;

    double resolved_mean_burst_size() const;
    Duration resolved_warmup() const;

    /// Throws ConfigError naming the offending key.
    void validate() const;
};

class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string key, const std::string& message)
        : std::invalid_argument("config key '" + key + "': " + message), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// Applies `key = value` settings from a JSON object on top of `base`.
/// Unknown keys are rejected.
SimConfig apply_config_json(SimConfig base, std::string_view json_text);
SimConfig load_config_file(const std::filesystem::path& path, SimConfig base = {});

/// Fully resolved config as JSON text (stable key order).
std::string config_to_json(const SimConfig& cfg);

/// (key, default value, description) for every config key.
struct ConfigKeyDoc {
    std::string key;
    std::string default_value;
    std::string description;
};
std::vector<ConfigKeyDoc> config_key_docs();

} // namespace obs
