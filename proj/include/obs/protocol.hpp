#pragma once

#include "obs/decision.hpp"
#include "obs/statistics.hpp"
#include "obs/topology.hpp"
#include "obs/types.hpp"

#include <cstdint>
#include <random>
#include <variant>
#include <vector>

namespace obs {

using BurstId = std::uint64_t;

/// Burst header packet. One instance per transmission attempt.
struct Bhp {
    BurstId burst_id = 0;
    NodeId src;
    NodeId dst;
    std::uint64_t burst_size = 0;         // bytes
    Duration offset_remaining{0};         // gap between this BHP and its burst
    std::vector<NodeId> route_taken;      // ends with the node currently holding the BHP
    std::vector<NodeId> planned;          // remaining planned route, starting at the current node
    std::uint32_t retransmission_count = 0;
    std::uint32_t deflection_count = 0;   // over the burst lifetime
};

struct Ack {
    BurstId burst_id = 0;
    Piggyback piggyback;
};

enum class NackReason { Contention, OffsetInsufficient };

struct Nack {
    BurstId burst_id = 0;
    NackReason reason = NackReason::Contention;
    Piggyback piggyback;
};

struct OffsetParams {
    Duration t_conf = std::chrono::microseconds(10);
    Duration t_p = std::chrono::microseconds(10);
};

/// Minimum offset for a BHP that will be processed at `n_hops` more switches.
constexpr Duration offset_time(const OffsetParams& p, std::size_t n_hops) {
    return p.t_conf + static_cast<Duration::rep>(n_hops) * p.t_p;
}

/// Hop count to size the ingress offset: the lowest-cost alternative that
/// leaves through a different port than the shortest path, if it would be
/// allowed to deflect; otherwise the shortest path.
std::size_t predict_hops(const RoutingTable& table, NodeId dst, const Route& shortest, double sp_th);

/// Inclusive check of the remaining offset against what the rest of the route needs.
constexpr bool offset_sufficient(const Bhp& bhp, std::size_t remaining_hops, const OffsetParams& p) {
    return bhp.offset_remaining >= offset_time(p, remaining_hops);
}

struct RetransmitAt {
    SimTime when;
};
struct GiveUp {};
using RetransmissionOutcome = std::variant<RetransmitAt, GiveUp>;

/// Truncated retransmission: after `count` retransmissions, retry once more
/// after U[0, idle_max) unless the budget `n_ret` is spent.
RetransmissionOutcome schedule_retransmission(SimTime now, std::mt19937_64& rng, std::uint32_t n_ret,
                                              std::uint32_t count, Duration idle_max = std::chrono::milliseconds(50));

} // namespace obs
