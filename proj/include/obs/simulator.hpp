#pragma once

#include "obs/channel_schedule.hpp"
#include "obs/config.hpp"
#include "obs/decision.hpp"
#include "obs/metrics.hpp"
#include "obs/protocol.hpp"
#include "obs/statistics.hpp"
#include "obs/topology.hpp"
#include "obs/traffic.hpp"

#include <cstdint>
#include <memory>
#include <ostream>
#include <queue>
#include <random>
#include <unordered_map>
#include <vector>

namespace obs {

struct RunOptions {
    /// Newline-delimited control-event log; null disables tracing.
    std::ostream* trace = nullptr;
    bool keep_samples = true;
    /// Keep every reservation for ChannelSchedule::audit() instead of pruning.
    bool audit_reservations = false;
    /// When false only bursts added with inject_burst() exist.
    bool generate_traffic = true;
};

enum class EventKind : std::uint8_t {
    BurstArrival,
    BhpAtNode,
    BurstAtNode,
    AckAtNode,
    NackAtNode,
    RetransmitTimer,
    PeriodicUpdate,
};

/// Scheduled event, executed in (time, sequence) order.
struct Event {
    SimTime time;
    std::uint64_t sequence;
    EventKind kind;
    std::uint32_t slot;  // generator / BHP / notice index, per kind
    std::uint64_t burst; // burst id where relevant

    bool operator>(const Event& o) const {
        return time != o.time ? time > o.time : sequence > o.sequence;
    }
};

/// One single-threaded OBS network simulation.
///
/// Every node runs the forwarding procedure for the configured scheme: the BHP
/// is checked at the destination, then for offset sufficiency, then tries its
/// planned output port; on contention the scheme decides between deflection,
/// retransmission and drop. ACK/NACK messages walk the reverse path on the
/// contention-free control plane and every node they cross ingests the link
/// statistics they carry.
class Simulator {
public:
    /// Validates the config and builds all state; throws on invalid input.
    explicit Simulator(SimConfig cfg, RunOptions opt = {});
    Simulator(const Simulator&) = delete;
    Simulator& operator=(const Simulator&) = delete;

    /// Adds a burst outside the Poisson sources (scripted scenarios).
    BurstId inject_burst(SimTime t, NodeId src, NodeId dst, std::uint64_t size_bytes);

    /// Reserves `channels` data channels of (from -> to) over [start, start+d).
    void occupy(NodeId from, NodeId to, SimTime start, Duration d, std::uint32_t channels);

    /// Executes all events up to the configured duration.
    SimMetrics run();

    /// Refreshes one node's threshold and routing table from its knowledge base.
    void periodic_update(NodeId node);

    const SimConfig& config() const { return cfg_; }
    const Topology& topology() const { return *topo_; }
    const RouteSet& routes() const { return *routes_; }
    const KnowledgeBase& knowledge(NodeId n) const { return kbs_.at(n.index); }
    KnowledgeBase& knowledge(NodeId n) { return kbs_.at(n.index); }
    const RoutingTable& routing_table(NodeId n) const { return tables_.at(n.index); }
    double threshold(NodeId n) const;
    const ChannelSchedule& schedule() const { return schedule_; }
    LinkMeter& meter(NodeId from, NodeId to) { return meters_.at(topo_->link_index(from, to)); }
    const SimMetrics& metrics() const { return metrics_; }
    std::uint64_t attempts() const { return attempts_; }
    /// Tracked bursts neither delivered nor lost yet, counted from the live burst records.
    std::uint64_t tracked_in_flight() const;

private:
    struct BurstRecord {
        NodeId src;
        NodeId dst;
        std::uint64_t size;
        SimTime created;
        std::uint32_t retransmissions = 0;
        std::uint32_t deflections = 0;
        bool tracked = false;
        bool resolved = false;
    };

    struct Notice {
        bool is_nack = false;
        NackReason reason = NackReason::Contention;
        BurstId burst = 0;
        Piggyback piggyback{};
        std::vector<NodeId> path; // forward path; walked backwards
        std::size_t pos = 0;      // index of the node holding the notice
    };

    void push(SimTime t, EventKind kind, std::uint32_t slot, std::uint64_t burst);
    void dispatch(const Event& e);

    void on_arrival(const BurstArrival& a, BurstId id);
    void start_attempt(BurstId id, SimTime now);
    void handle_bhp(std::uint32_t slot, SimTime now);
    void forward(std::uint32_t slot, NodeId next, SimTime now);
    void emit_notice(std::uint32_t slot, bool is_nack, NackReason reason, const Piggyback& pb, SimTime now);
    void on_notice(std::uint32_t notice_slot, SimTime now);
    void at_source(const Notice& n, SimTime now);
    void record_loss(BurstRecord& rec, BurstId id, NodeId node, SimTime now);

    Duration burst_duration(std::uint64_t bytes, LinkIndex link) const;
    std::uint32_t alloc_bhp();
    void free_bhp(std::uint32_t slot);
    std::uint32_t alloc_notice();
    bool uses_cost_table() const;

    void trace_line(SimTime t, const char* type, BurstId id, NodeId node, const char* fmt, ...)
#if defined(__GNUC__)
        __attribute__((format(printf, 6, 7)))
#endif
        ;

    SimConfig cfg_;
    RunOptions opt_;
    std::unique_ptr<const Topology> topo_;
    std::unique_ptr<const RouteSet> routes_;
    SimTime warmup_;
    SimTime end_;

    std::vector<LinkMeter> meters_;
    ChannelSchedule schedule_;
    std::vector<KnowledgeBase> kbs_;
    std::vector<RoutingTable> tables_;
    std::vector<double> thresholds_;

    std::vector<TrafficSource> sources_;
    std::vector<BurstArrival> next_arrival_;
    struct Injected {
        BurstArrival arrival;
        BurstId id;
    };
    std::vector<Injected> injected_;
    std::mt19937_64 retransmit_rng_;

    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
    std::uint64_t sequence_ = 0;

    std::unordered_map<BurstId, BurstRecord> bursts_;
    BurstId next_burst_id_ = 0;

    std::vector<Bhp> bhps_;
    std::vector<std::uint32_t> free_bhps_;
    std::vector<Notice> notices_;
    std::vector<std::uint32_t> free_notices_;
    std::vector<NodeId> tried_;

    SimMetrics metrics_;
    std::uint64_t attempts_ = 0;
    bool ran_ = false;
};

/// Builds a Simulator and runs it to completion.
SimMetrics run(const SimConfig& cfg, const RunOptions& opt = {});

} // namespace obs
