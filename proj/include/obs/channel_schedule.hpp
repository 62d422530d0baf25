#pragma once

#include "obs/topology.hpp"
#include "obs/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace obs {

/// Data-channel reservations for every directed link. Each channel holds a set
/// of disjoint half-open intervals [start, end).
class ChannelSchedule {
public:
    explicit ChannelSchedule(const Topology& topo);

    /// First-fit over the link's data channels. Returns the channel reserved, or
    /// nullopt on contention (every channel overlaps the interval).
    std::optional<std::uint32_t> try_reserve(LinkIndex link, SimTime start, Duration duration);

    /// Same test without reserving.
    bool can_reserve(LinkIndex link, SimTime start, Duration duration) const;

    /// Forget reservations that ended at or before `t`.
    void prune(SimTime t);

    std::uint32_t channel_count(LinkIndex link) const { return static_cast<std::uint32_t>(channels_.at(link).size()); }

    /// True iff no channel holds two overlapping intervals.
    bool audit() const;

    struct Interval {
        SimTime start;
        SimTime end;
    };
    std::vector<Interval> intervals(LinkIndex link, std::uint32_t channel) const;

private:
    using Channel = std::map<SimTime, SimTime>; // start -> end

    static bool overlaps(const Channel& ch, SimTime start, SimTime end);

    std::vector<std::vector<Channel>> channels_;
};

} // namespace obs
