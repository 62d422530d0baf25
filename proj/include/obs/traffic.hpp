#pragma once

#include "obs/types.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

namespace obs {

enum class BurstSizeLaw { Exponential, Constant };

BurstSizeLaw parse_burst_size_law(std::string_view s);
std::string_view to_string(BurstSizeLaw law);

struct BurstArrival {
    SimTime time;
    NodeId src;
    NodeId dst;
    std::uint64_t size_bytes;
};

/// Poisson burst source attached to one node. Destinations are uniform over
/// the other nodes. Each source owns its random stream, so traffic does not
/// depend on what the rest of the simulation draws.
class TrafficSource {
public:
    TrafficSource(NodeId node, std::uint32_t node_count, double bursts_per_second, double mean_size_bytes,
                  BurstSizeLaw law, std::uint64_t seed);

    /// Next arrival after the previous one; nullopt for a silent source.
    std::optional<BurstArrival> next();

    NodeId node() const { return node_; }
    double rate() const { return rate_; }

private:
    NodeId node_;
    std::uint32_t node_count_;
    double rate_;
    double mean_size_;
    BurstSizeLaw law_;
    std::mt19937_64 rng_;
    double clock_seconds_ = 0.0;
};

/// Burst rate per generator so that the total offered bit-rate equals
/// load * capacity, split evenly.
double per_generator_burst_rate(double load, double capacity_bps, double mean_size_bytes, std::size_t generators);

/// All nodes, or a seeded random subset of `count` nodes (sorted).
std::vector<NodeId> select_generators(std::uint32_t node_count, bool random_subset, std::uint32_t count,
                                      std::uint64_t seed);

/// Stream seed for sub-generator `stream` of run `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

} // namespace obs
