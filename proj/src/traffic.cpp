#include "obs/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace obs {

BurstSizeLaw parse_burst_size_law(std::string_view s) {
    if (s == "exponential") return BurstSizeLaw::Exponential;
    if (s == "constant") return BurstSizeLaw::Constant;
    throw std::invalid_argument("unknown burst size law '" + std::string(s) + "' (expected exponential|constant)");
}

std::string_view to_string(BurstSizeLaw law) {
    return law == BurstSizeLaw::Exponential ? "exponential" : "constant";
}

TrafficSource::TrafficSource(NodeId node, std::uint32_t node_count, double bursts_per_second, double mean_size_bytes,
                             BurstSizeLaw law, std::uint64_t seed)
    : node_(node), node_count_(node_count), rate_(bursts_per_second), mean_size_(mean_size_bytes), law_(law),
      rng_(seed) {
    if (node_count_ < 2) throw std::invalid_argument("TrafficSource: need at least two nodes");
    if (rate_ < 0) throw std::invalid_argument("TrafficSource: negative rate");
    if (!(mean_size_ > 0)) throw std::invalid_argument("TrafficSource: mean burst size must be positive");
}

std::optional<BurstArrival> TrafficSource::next() {
    if (rate_ <= 0) return std::nullopt;
    clock_seconds_ += std::exponential_distribution<double>(rate_)(rng_);

    double size = mean_size_;
    if (law_ == BurstSizeLaw::Exponential) size = std::exponential_distribution<double>(1.0 / mean_size_)(rng_);

    // Uniform over the other nodes: draw from N-1 slots and skip over ourselves.
    std::uniform_int_distribution<std::uint32_t> pick(0, node_count_ - 2);
    std::uint32_t d = pick(rng_);
    if (d >= node_.index) ++d;

    return BurstArrival{from_seconds(clock_seconds_), node_, NodeId{d},
                        std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(size)))};
}

double per_generator_burst_rate(double load, double capacity_bps, double mean_size_bytes, std::size_t generators) {
    if (generators == 0) return 0.0;
    return load * capacity_bps / static_cast<double>(generators) / (mean_size_bytes * 8.0);
}

std::vector<NodeId> select_generators(std::uint32_t node_count, bool random_subset, std::uint32_t count,
                                      std::uint64_t seed) {
    std::vector<std::uint32_t> ids(node_count);
    std::iota(ids.begin(), ids.end(), 0u);
    if (random_subset) {
        if (count == 0 || count > node_count)
            throw std::invalid_argument("generator_count must be in [1, node count]");
        std::mt19937_64 rng(derive_seed(seed, 0xC0FFEE));
        std::shuffle(ids.begin(), ids.end(), rng);
        ids.resize(count);
        std::sort(ids.begin(), ids.end());
    }
    std::vector<NodeId> out;
    out.reserve(ids.size());
    for (auto i : ids) out.emplace_back(i);
    return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 over (seed, stream)
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace obs
