#pragma once

#include "obs/topology.hpp"
#include "obs/types.hpp"

#include <cstdint>
#include <deque>
#include <optional>
#include <ostream>
#include <queue>
#include <span>
#include <utility>
#include <vector>

namespace obs {

/// Measured state of one directed link.
struct LinkStats {
    double blr = 0.0;
    double utilization = 0.0;
    SimTime as_of{0};

    friend bool operator==(const LinkStats&, const LinkStats&) = default;
};

/// Sliding-window BLR and utilization meter for one directed link.
///
/// The window at time `now` is (now - window, now]. Offers count when their
/// time falls inside it; reservations contribute their overlap with it in
/// channel-time. An empty window reads as blr 0, utilization 0.
class LinkMeter {
public:
    LinkMeter(Duration window, std::uint32_t data_channels);

    /// `t` must be non-decreasing across calls.
    void record_offer(SimTime t, bool dropped);
    /// `start` must not precede the latest snapshot time.
    void record_reservation(SimTime start, Duration duration);

    LinkStats snapshot(SimTime now);

    /// Channel-seconds reserved inside the window ending at `now`.
    double reserved_seconds(SimTime now);

    Duration window() const { return window_; }
    std::uint32_t data_channels() const { return channels_; }

private:
    struct Offer {
        SimTime t;
        bool dropped;
    };
    // Cumulative busy channel-time A(t) is piecewise linear; breakpoints hold
    // (t, A(t), active channels just after t).
    struct Breakpoint {
        SimTime t;
        std::int64_t area; // channel-nanoseconds
        std::int32_t active;
    };
    struct Edge {
        SimTime t;
        std::int32_t delta;
        bool operator>(const Edge& o) const { return t > o.t; }
    };

    void expire_offers(SimTime now);
    void advance_to(SimTime now);
    std::int64_t area_at(SimTime t) const; // t within the retained breakpoints

    Duration window_;
    std::uint32_t channels_;

    std::deque<Offer> offers_;
    std::uint64_t offered_ = 0;
    std::uint64_t dropped_ = 0;

    std::priority_queue<Edge, std::vector<Edge>, std::greater<>> pending_;
    std::deque<Breakpoint> history_;
};

/// A node's local view of the network: freshest known stats per directed link.
class KnowledgeBase {
public:
    KnowledgeBase(NodeId owner, const Topology& topo);

    NodeId owner() const { return owner_; }

    /// Replaces the entry iff stats.as_of >= the stored one. Unknown links are
    /// counted and ignored. Returns true when the entry changed.
    bool ingest(NodeId from, NodeId to, const LinkStats& stats);
    bool ingest(LinkIndex link, const LinkStats& stats);

    const std::optional<LinkStats>& entry(LinkIndex link) const { return entries_.at(link); }
    std::size_t known_links() const { return known_; }
    std::uint64_t rejected_unknown() const { return rejected_unknown_; }

    /// Unweighted means of blr and utilization over known links; (0,0) if none.
    std::pair<double, double> network_aggregates() const;

    /// CSV: link_src,link_dst,blr,utilization,as_of
    void dump_csv(std::ostream& os) const;

private:
    NodeId owner_;
    const Topology* topo_;
    std::vector<std::optional<LinkStats>> entries_;
    std::size_t known_ = 0;
    std::uint64_t rejected_unknown_ = 0;
};

inline std::pair<double, double> network_aggregates(const KnowledgeBase& kb) { return kb.network_aggregates(); }

/// Stats payloads for notifications. Both throw std::out_of_range when the
/// link does not exist.
struct Piggyback {
    LinkIndex link;
    LinkStats stats;
};

/// NACK: the contended link (node -> next).
Piggyback piggyback_for_nack(const Topology& topo, NodeId node, NodeId next, std::span<LinkMeter> meters, SimTime now);
/// ACK: the last link of the delivered path (prev -> dest).
Piggyback piggyback_for_ack(const Topology& topo, NodeId dest, NodeId prev, std::span<LinkMeter> meters, SimTime now);

} // namespace obs
