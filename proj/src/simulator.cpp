#include "obs/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <stdexcept>

namespace obs {

namespace {

std::unique_ptr<const Topology> checked_topology(const SimConfig& cfg) {
    cfg.validate();
    try {
        return std::make_unique<const Topology>(make_topology(cfg.topology));
    } catch (const std::exception& e) {
        throw ConfigError("topology", e.what());
    }
}

constexpr std::uint64_t kTrafficStream = 1;
constexpr std::uint64_t kRetransmitStream = 0x5EED;

const char* reason_name(NackReason r) { return r == NackReason::Contention ? "contention" : "offset"; }

} // namespace

Simulator::Simulator(SimConfig cfg, RunOptions opt)
    : cfg_(std::move(cfg)), opt_(opt), topo_(checked_topology(cfg_)),
      routes_(std::make_unique<const RouteSet>(*topo_, cfg_.xi)), warmup_(cfg_.resolved_warmup()),
      end_(cfg_.duration), schedule_(*topo_), retransmit_rng_(derive_seed(cfg_.seed, kRetransmitStream)) {
    const std::uint32_t n = topo_->node_count();
    if (cfg_.random_generators && cfg_.generator_count > n)
        throw ConfigError("generator_count", "exceeds the topology's node count");

    meters_.reserve(topo_->directed_link_count());
    for (LinkIndex i = 0; i < topo_->directed_link_count(); ++i)
        meters_.emplace_back(cfg_.stats_window, topo_->directed(i).link->data_channels);

    kbs_.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) kbs_.emplace_back(NodeId{i}, *topo_);
    tables_.resize(n);
    thresholds_.assign(n, 0.0);
    for (std::uint32_t i = 0; i < n; ++i)
        tables_[i] = rebuild_routing_table(NodeId{i}, kbs_[i], *topo_, *routes_, cfg_.dp_weights);

    if (opt_.generate_traffic) {
        auto gens = select_generators(n, cfg_.random_generators, cfg_.generator_count, cfg_.seed);
        const double mean = cfg_.resolved_mean_burst_size();
        const double rate = per_generator_burst_rate(cfg_.load, topo_->data_capacity(), mean, gens.size());
        for (NodeId g : gens) {
            sources_.emplace_back(g, n, rate, mean, cfg_.burst_size_law,
                                  derive_seed(cfg_.seed, kTrafficStream + 1 + g.index));
        }
        next_arrival_.resize(sources_.size());
        for (std::uint32_t i = 0; i < sources_.size(); ++i) {
            if (auto a = sources_[i].next(); a && a->time <= end_) {
                next_arrival_[i] = *a;
                push(a->time, EventKind::BurstArrival, i, 0);
            }
        }
    }
    if (cfg_.update_period <= end_) push(cfg_.update_period, EventKind::PeriodicUpdate, 0, 0);

    metrics_.scheme = std::string(to_string(cfg_.policy.scheme));
    metrics_.topology = topo_->name();
    metrics_.load = cfg_.load;
    metrics_.seed = cfg_.seed;
}

double Simulator::threshold(NodeId n) const {
    return cfg_.pinned_threshold ? *cfg_.pinned_threshold : thresholds_.at(n.index);
}

std::uint64_t Simulator::tracked_in_flight() const {
    return static_cast<std::uint64_t>(
        std::count_if(bursts_.begin(), bursts_.end(), [](const auto& kv) { return kv.second.tracked && !kv.second.resolved; }));
}

bool Simulator::uses_cost_table() const {
    return cfg_.policy.scheme == Scheme::Ahdr || cfg_.policy.scheme == Scheme::DeflectOnly;
}

BurstId Simulator::inject_burst(SimTime t, NodeId src, NodeId dst, std::uint64_t size_bytes) {
    if (ran_) throw std::logic_error("inject_burst after run()");
    if (src == dst) throw std::invalid_argument("inject_burst: src == dst");
    const BurstId id = next_burst_id_++;
    injected_.push_back(Injected{BurstArrival{t, src, dst, size_bytes}, id});
    // Injected arrivals are tagged with burst = 1.
    push(t, EventKind::BurstArrival, static_cast<std::uint32_t>(injected_.size() - 1), 1);
    return id;
}

void Simulator::occupy(NodeId from, NodeId to, SimTime start, Duration d, std::uint32_t channels) {
    LinkIndex link = topo_->link_index(from, to);
    for (std::uint32_t c = 0; c < channels; ++c) {
        if (!schedule_.try_reserve(link, start, d)) throw std::logic_error("occupy: link already saturated");
    }
}

void Simulator::push(SimTime t, EventKind kind, std::uint32_t slot, std::uint64_t burst) {
    queue_.push(Event{t, sequence_++, kind, slot, burst});
}

SimMetrics Simulator::run() {
    if (ran_) throw std::logic_error("Simulator::run called twice");
    ran_ = true;
    while (!queue_.empty() && queue_.top().time <= end_) {
        Event e = queue_.top();
        queue_.pop();
        dispatch(e);
    }
    return metrics_;
}

void Simulator::dispatch(const Event& e) {
    switch (e.kind) {
    case EventKind::BurstArrival:
        if (e.burst == 1) {
            on_arrival(injected_[e.slot].arrival, injected_[e.slot].id);
        } else {
            on_arrival(next_arrival_[e.slot], next_burst_id_++);
            if (auto a = sources_[e.slot].next(); a && a->time <= end_) {
                next_arrival_[e.slot] = *a;
                push(a->time, EventKind::BurstArrival, e.slot, 0);
            }
        }
        break;
    case EventKind::BhpAtNode:
        handle_bhp(e.slot, e.time);
        break;
    case EventKind::BurstAtNode: {
        auto it = bursts_.find(e.burst);
        if (it == bursts_.end()) break;
        BurstRecord& rec = it->second;
        const double delay = to_seconds(e.time - rec.created);
        if (rec.tracked) {
            ++metrics_.bursts_delivered;
            metrics_.delay_sum += delay;
            ++metrics_.delay_count;
            if (opt_.keep_samples) metrics_.delay_samples.emplace_back(e.burst, delay);
        }
        rec.resolved = true;
        if (opt_.trace) trace_line(e.time, "DELIVER", e.burst, rec.dst, "delay=%.9f", delay);
        bursts_.erase(it);
        break;
    }
    case EventKind::AckAtNode:
    case EventKind::NackAtNode:
        on_notice(e.slot, e.time);
        break;
    case EventKind::RetransmitTimer:
        start_attempt(e.burst, e.time);
        break;
    case EventKind::PeriodicUpdate:
        for (std::uint32_t i = 0; i < topo_->node_count(); ++i) periodic_update(NodeId{i});
        if (!opt_.audit_reservations) schedule_.prune(e.time);
        if (e.time + cfg_.update_period <= end_) push(e.time + cfg_.update_period, EventKind::PeriodicUpdate, 0, 0);
        break;
    }
}

void Simulator::periodic_update(NodeId node) {
    auto [blr_topo, u_topo] = kbs_.at(node.index).network_aggregates();
    thresholds_[node.index] = decision_threshold(blr_topo, u_topo, cfg_.threshold_weights);
    if (uses_cost_table())
        tables_[node.index] = rebuild_routing_table(node, kbs_[node.index], *topo_, *routes_, cfg_.dp_weights);
}

void Simulator::on_arrival(const BurstArrival& a, BurstId id) {
    BurstRecord rec{.src = a.src, .dst = a.dst, .size = a.size_bytes, .created = a.time};
    rec.tracked = a.time >= warmup_;
    if (rec.tracked) ++metrics_.bursts_generated;
    bursts_.emplace(id, rec);
    if (opt_.trace) {
        trace_line(a.time, "GEN", id, a.src, "dst=%u size=%llu tracked=%d", a.dst.index,
                   static_cast<unsigned long long>(a.size_bytes), rec.tracked ? 1 : 0);
    }
    start_attempt(id, a.time);
}

void Simulator::start_attempt(BurstId id, SimTime now) {
    auto it = bursts_.find(id);
    if (it == bursts_.end()) return;
    const BurstRecord& rec = it->second;
    const Route& shortest = routes_->shortest(rec.src, rec.dst);

    std::size_t hops = shortest.hop_count();
    if (cfg_.policy.scheme == Scheme::Ahdr) hops = predict_hops(tables_[rec.src.index], rec.dst, shortest, threshold(rec.src));
    const Duration offset = offset_time(cfg_.offset, hops);

    if (rec.tracked) {
        ++attempts_;
        metrics_.offset_sum += to_seconds(offset);
        ++metrics_.offset_count;
        if (opt_.keep_samples) metrics_.offset_samples.push_back(to_seconds(offset));
    }

    const std::uint32_t slot = alloc_bhp();
    Bhp& bhp = bhps_[slot];
    bhp.burst_id = id;
    bhp.src = rec.src;
    bhp.dst = rec.dst;
    bhp.burst_size = rec.size;
    bhp.offset_remaining = offset;
    bhp.route_taken.assign(1, rec.src);
    bhp.planned.assign(shortest.hops.begin(), shortest.hops.end());
    bhp.retransmission_count = rec.retransmissions;
    bhp.deflection_count = rec.deflections;
    handle_bhp(slot, now);
}

Duration Simulator::burst_duration(std::uint64_t bytes, LinkIndex link) const {
    const double rate = topo_->directed(link).link->channel_rate;
    const auto ns = static_cast<Duration::rep>(std::ceil(static_cast<double>(bytes) * 8.0 / rate * 1e9));
    return Duration(std::max<Duration::rep>(1, ns));
}

void Simulator::handle_bhp(std::uint32_t slot, SimTime now) {
    Bhp& bhp = bhps_[slot];
    const NodeId node = bhp.route_taken.back();
    auto rec_it = bursts_.find(bhp.burst_id);
    BurstRecord* rec = rec_it == bursts_.end() ? nullptr : &rec_it->second;

    if (opt_.trace) {
        trace_line(now, "BHP", bhp.burst_id, node, "attempt=%u offset_rem=%.9f planned_hops=%zu", bhp.retransmission_count,
                   to_seconds(bhp.offset_remaining), bhp.planned.size() - 1);
    }

    // Arrived at the destination: the burst follows on reserved channels.
    if (node == bhp.dst) {
        const NodeId prev = bhp.route_taken[bhp.route_taken.size() - 2];
        const LinkIndex in_link = topo_->link_index(prev, node);
        const Piggyback pb = piggyback_for_ack(*topo_, node, prev, meters_, now);
        push(now + bhp.offset_remaining + burst_duration(bhp.burst_size, in_link), EventKind::BurstAtNode, 0,
             bhp.burst_id);
        if (rec && rec->tracked) ++metrics_.acks;
        emit_notice(slot, false, NackReason::Contention, pb, now);
        return;
    }

    const std::size_t remaining = bhp.planned.size() - 1;
    if (!offset_sufficient(bhp, remaining, cfg_.offset)) {
        if (rec && rec->tracked) ++metrics_.offset_failures;
        if (opt_.trace) {
            trace_line(now, "OFFSET_FAIL", bhp.burst_id, node, "need=%.9f have=%.9f",
                       to_seconds(offset_time(cfg_.offset, remaining)), to_seconds(bhp.offset_remaining));
        }
        // Stats of the link the BHP came in on.
        const NodeId prev = bhp.route_taken.size() >= 2 ? bhp.route_taken[bhp.route_taken.size() - 2] : bhp.planned[1];
        const Piggyback pb = bhp.route_taken.size() >= 2 ? piggyback_for_ack(*topo_, node, prev, meters_, now)
                                                         : piggyback_for_nack(*topo_, node, prev, meters_, now);
        if (rec && bhp.retransmission_count >= cfg_.n_ret) record_loss(*rec, bhp.burst_id, node, now);
        if (rec && rec->tracked) ++metrics_.nacks;
        emit_notice(slot, true, NackReason::OffsetInsufficient, pb, now);
        return;
    }

    const NodeId primary = bhp.planned[1];
    const LinkIndex primary_link = topo_->link_index(node, primary);
    const SimTime data_arrival = now + bhp.offset_remaining;
    const Duration dur = burst_duration(bhp.burst_size, primary_link);

    if (schedule_.try_reserve(primary_link, data_arrival, dur)) {
        meters_[primary_link].record_offer(now, false);
        meters_[primary_link].record_reservation(data_arrival, dur);
        if (opt_.trace) {
            trace_line(now, "RESERVE", bhp.burst_id, node, "next=%u data_arrival=%.9f bhp_done=%.9f end=%.9f",
                       primary.index, to_seconds(data_arrival), to_seconds(now + cfg_.offset.t_p),
                       to_seconds(data_arrival + dur));
        }
        forward(slot, primary, now);
        return;
    }

    meters_[primary_link].record_offer(now, true);
    if (rec && rec->tracked) ++metrics_.contentions;

    const ContentionContext ctx{
        .node = node,
        .dst = bhp.dst,
        .contended_next = primary,
        .visited = bhp.route_taken,
        .retransmissions = bhp.retransmission_count,
        .n_ret = cfg_.n_ret,
        .burst_deflections = bhp.deflection_count,
    };

    int free_alts = -1;
    int alts = -1;
    if (opt_.trace) {
        // Loop-free alternative ports, and those realisable at this instant.
        std::vector<NodeId> none;
        std::vector<NodeId> seen;
        free_alts = 0;
        for (const Route& r : routes_->routes(node, bhp.dst)) {
            if (!detail::admissible(r, ctx, none)) continue;
            if (std::find(seen.begin(), seen.end(), r.next_hop()) != seen.end()) continue;
            seen.push_back(r.next_hop());
            const LinkIndex li = topo_->link_index(node, r.next_hop());
            if (schedule_.can_reserve(li, data_arrival, burst_duration(bhp.burst_size, li))) ++free_alts;
        }
        alts = static_cast<int>(seen.size());
    }

    tried_.clear();
    auto port_free = [&](NodeId next) {
        const LinkIndex li = topo_->link_index(node, next);
        const bool ok = schedule_.can_reserve(li, data_arrival, burst_duration(bhp.burst_size, li));
        if (!ok) meters_[li].record_offer(now, true);
        return ok;
    };
    const ContentionDecision decision = resolve_contention(cfg_.policy, ctx, tables_[node.index],
                                                           routes_->routes(node, bhp.dst), threshold(node), tried_,
                                                           port_free);

    if (const auto* d = std::get_if<Deflect>(&decision)) {
        const LinkIndex li = topo_->link_index(node, d->next_hop);
        const Duration alt_dur = burst_duration(bhp.burst_size, li);
        if (!schedule_.try_reserve(li, data_arrival, alt_dur)) throw std::logic_error("deflection port was not free");
        meters_[li].record_offer(now, false);
        meters_[li].record_reservation(data_arrival, alt_dur);
        ++bhp.deflection_count;
        if (rec) {
            ++rec->deflections;
            if (rec->tracked) ++metrics_.deflections;
        }
        if (opt_.trace) {
            trace_line(now, "CONTENTION", bhp.burst_id, node, "port=%u alts=%d free_alts=%d outcome=deflect", primary.index,
                       alts, free_alts);
            trace_line(now, "DEFLECT", bhp.burst_id, node, "next=%u hops=%zu data_arrival=%.9f bhp_done=%.9f",
                       d->next_hop.index, d->route->hop_count(), to_seconds(data_arrival),
                       to_seconds(now + cfg_.offset.t_p));
        }
        bhp.planned.assign(d->route->hops.begin(), d->route->hops.end());
        forward(slot, d->next_hop, now);
        return;
    }

    const bool drop = std::holds_alternative<Drop>(decision);
    if (opt_.trace) {
        trace_line(now, "CONTENTION", bhp.burst_id, node, "port=%u alts=%d free_alts=%d outcome=%s", primary.index, alts, free_alts,
                   drop ? "drop" : "retransmit");
    }
    if (drop && rec) record_loss(*rec, bhp.burst_id, node, now);
    if (rec && rec->tracked) ++metrics_.nacks;
    emit_notice(slot, true, NackReason::Contention, piggyback_for_nack(*topo_, node, primary, meters_, now), now);
}

void Simulator::forward(std::uint32_t slot, NodeId next, SimTime now) {
    Bhp& bhp = bhps_[slot];
    const NodeId node = bhp.route_taken.back();
    const Duration prop = topo_->directed(topo_->link_index(node, next)).link->prop_delay;
    bhp.offset_remaining -= cfg_.offset.t_p;
    bhp.route_taken.push_back(next);
    bhp.planned.erase(bhp.planned.begin());
    push(now + cfg_.offset.t_p + prop, EventKind::BhpAtNode, slot, bhp.burst_id);
}

void Simulator::record_loss(BurstRecord& rec, BurstId id, NodeId node, SimTime now) {
    if (rec.resolved) return;
    rec.resolved = true;
    if (rec.tracked) ++metrics_.bursts_lost;
    if (opt_.trace) trace_line(now, "DROP", id, node, "retransmissions=%u tracked=%d", rec.retransmissions, rec.tracked ? 1 : 0);
}

void Simulator::emit_notice(std::uint32_t slot, bool is_nack, NackReason reason, const Piggyback& pb, SimTime now) {
    const std::uint32_t ns = alloc_notice();
    Notice& n = notices_[ns];
    Bhp& bhp = bhps_[slot];
    n.is_nack = is_nack;
    n.reason = reason;
    n.burst = bhp.burst_id;
    n.piggyback = pb;
    n.path.swap(bhp.route_taken);
    n.pos = n.path.size() - 1;
    free_bhp(slot);

    if (opt_.trace) {
        const DirectedLink dl = topo_->directed(pb.link);
        if (is_nack) {
            trace_line(now, "NACK", n.burst, n.path[n.pos], "reason=%s link=%u-%u blr=%.9f util=%.9f",
                       reason_name(reason), dl.from.index, dl.to.index, pb.stats.blr, pb.stats.utilization);
        } else {
            trace_line(now, "ACK", n.burst, n.path[n.pos], "link=%u-%u blr=%.9f util=%.9f", dl.from.index,
                       dl.to.index, pb.stats.blr, pb.stats.utilization);
        }
    }
    on_notice(ns, now);
}

void Simulator::on_notice(std::uint32_t ns, SimTime now) {
    Notice& n = notices_[ns];
    const NodeId here = n.path[n.pos];
    kbs_[here.index].ingest(n.piggyback.link, n.piggyback.stats);
    if (n.pos == 0) {
        at_source(n, now);
        n.path.clear();
        free_notices_.push_back(ns);
        return;
    }
    const NodeId up = n.path[n.pos - 1];
    const Duration prop = topo_->directed(topo_->link_index(here, up)).link->prop_delay;
    --n.pos;
    push(now + prop, n.is_nack ? EventKind::NackAtNode : EventKind::AckAtNode, ns, n.burst);
}

void Simulator::at_source(const Notice& n, SimTime now) {
    if (!n.is_nack) return;
    auto it = bursts_.find(n.burst);
    if (it == bursts_.end()) return;
    BurstRecord& rec = it->second;
    if (rec.resolved) {
        bursts_.erase(it);
        return;
    }
    const RetransmissionOutcome out =
        schedule_retransmission(now, retransmit_rng_, cfg_.n_ret, rec.retransmissions, cfg_.retransmit_idle_max);
    if (const auto* at = std::get_if<RetransmitAt>(&out)) {
        ++rec.retransmissions;
        if (rec.tracked) ++metrics_.retransmissions;
        if (opt_.trace) trace_line(now, "RETX", n.burst, rec.src, "at=%.9f count=%u", to_seconds(at->when), rec.retransmissions);
        push(at->when, EventKind::RetransmitTimer, 0, n.burst);
    } else {
        record_loss(rec, n.burst, rec.src, now);
        bursts_.erase(it);
    }
}

std::uint32_t Simulator::alloc_bhp() {
    if (!free_bhps_.empty()) {
        std::uint32_t s = free_bhps_.back();
        free_bhps_.pop_back();
        return s;
    }
    bhps_.emplace_back();
    return static_cast<std::uint32_t>(bhps_.size() - 1);
}

void Simulator::free_bhp(std::uint32_t slot) {
    bhps_[slot].route_taken.clear();
    bhps_[slot].planned.clear();
    free_bhps_.push_back(slot);
}

std::uint32_t Simulator::alloc_notice() {
    if (!free_notices_.empty()) {
        std::uint32_t s = free_notices_.back();
        free_notices_.pop_back();
        return s;
    }
    notices_.emplace_back();
    return static_cast<std::uint32_t>(notices_.size() - 1);
}

void Simulator::trace_line(SimTime t, const char* type, BurstId id, NodeId node, const char* fmt, ...) {
    char detail[256];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(detail, sizeof detail, fmt, args);
    va_end(args);
    char line[384];
    const auto ns = t.count();
    std::snprintf(line, sizeof line, "%lld.%09lld %s %llu %u %s\n", static_cast<long long>(ns / 1'000'000'000),
                  static_cast<long long>(ns % 1'000'000'000), type, static_cast<unsigned long long>(id), node.index,
                  detail);
    *opt_.trace << line;
}

SimMetrics run(const SimConfig& cfg, const RunOptions& opt) {
    Simulator sim(cfg, opt);
    return sim.run();
}

} // namespace obs
