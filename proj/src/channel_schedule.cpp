#include "obs/channel_schedule.hpp"

#include <iterator>
#include <stdexcept>

namespace obs {

ChannelSchedule::ChannelSchedule(const Topology& topo) {
    channels_.resize(topo.directed_link_count());
    for (LinkIndex i = 0; i < channels_.size(); ++i) channels_[i].resize(topo.directed(i).link->data_channels);
}

bool ChannelSchedule::overlaps(const Channel& ch, SimTime start, SimTime end) {
    auto it = ch.lower_bound(start);
    if (it != ch.end() && it->first < end) return true;
    if (it != ch.begin() && std::prev(it)->second > start) return true;
    return false;
}

std::optional<std::uint32_t> ChannelSchedule::try_reserve(LinkIndex link, SimTime start, Duration duration) {
    if (duration <= Duration::zero()) throw std::invalid_argument("try_reserve: duration must be positive");
    auto& chans = channels_.at(link);
    const SimTime end = start + duration;
    for (std::uint32_t c = 0; c < chans.size(); ++c) {
        if (!overlaps(chans[c], start, end)) {
            chans[c].emplace(start, end);
            return c;
        }
    }
    return std::nullopt;
}

bool ChannelSchedule::can_reserve(LinkIndex link, SimTime start, Duration duration) const {
    const SimTime end = start + duration;
    for (const Channel& ch : channels_.at(link)) {
        if (!overlaps(ch, start, end)) return true;
    }
    return false;
}

void ChannelSchedule::prune(SimTime t) {
    for (auto& link : channels_) {
        for (Channel& ch : link) {
            // Disjoint, so start order is also end order.
            while (!ch.empty() && ch.begin()->second <= t) ch.erase(ch.begin());
        }
    }
}

bool ChannelSchedule::audit() const {
    for (const auto& link : channels_) {
        for (const Channel& ch : link) {
            SimTime prev_end = SimTime::min();
            for (auto [s, e] : ch) {
                if (e <= s || s < prev_end) return false;
                prev_end = e;
            }
        }
    }
    return true;
}

std::vector<ChannelSchedule::Interval> ChannelSchedule::intervals(LinkIndex link, std::uint32_t channel) const {
    std::vector<Interval> out;
    for (auto [s, e] : channels_.at(link).at(channel)) out.push_back(Interval{s, e});
    return out;
}

} // namespace obs
