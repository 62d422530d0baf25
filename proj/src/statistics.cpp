#include "obs/statistics.hpp"

#include <algorithm>
#include <iomanip>
#include <stdexcept>

namespace obs {

LinkMeter::LinkMeter(Duration window, std::uint32_t data_channels) : window_(window), channels_(data_channels) {
    if (window_ <= Duration::zero()) throw std::invalid_argument("LinkMeter: window must be positive");
    if (channels_ == 0) throw std::invalid_argument("LinkMeter: data_channels must be >= 1");
    history_.push_back(Breakpoint{SimTime{0}, 0, 0});
}

void LinkMeter::expire_offers(SimTime now) {
    const SimTime horizon = now - window_;
    while (!offers_.empty() && offers_.front().t <= horizon) {
        --offered_;
        if (offers_.front().dropped) --dropped_;
        offers_.pop_front();
    }
}

void LinkMeter::record_offer(SimTime t, bool dropped) {
    if (!offers_.empty() && t < offers_.back().t) throw std::logic_error("LinkMeter: offer times must not decrease");
    offers_.push_back(Offer{t, dropped});
    ++offered_;
    if (dropped) ++dropped_;
    expire_offers(t);
}

void LinkMeter::record_reservation(SimTime start, Duration duration) {
    if (duration < Duration::zero()) throw std::invalid_argument("LinkMeter: negative reservation duration");
    if (duration == Duration::zero()) return;
    if (start < history_.back().t) throw std::logic_error("LinkMeter: reservation starts before the measured past");
    pending_.push(Edge{start, +1});
    pending_.push(Edge{start + duration, -1});
}

void LinkMeter::advance_to(SimTime now) {
    while (!pending_.empty() && pending_.top().t <= now) {
        Edge e = pending_.top();
        pending_.pop();
        Breakpoint& last = history_.back();
        if (e.t == last.t) {
            last.active += e.delta;
        } else {
            history_.push_back(Breakpoint{e.t, last.area + last.active * (e.t - last.t).count(), last.active + e.delta});
        }
    }
    // Keep one breakpoint at or before the trailing edge of the window.
    const SimTime horizon = now - window_;
    while (history_.size() >= 2 && history_[1].t <= horizon) history_.pop_front();
}

std::int64_t LinkMeter::area_at(SimTime t) const {
    if (t <= history_.front().t) return history_.front().area;
    auto it = std::upper_bound(history_.begin(), history_.end(), t,
                               [](SimTime v, const Breakpoint& b) { return v < b.t; });
    const Breakpoint& b = *std::prev(it);
    return b.area + b.active * (t - b.t).count();
}

double LinkMeter::reserved_seconds(SimTime now) {
    advance_to(now);
    std::int64_t area = area_at(now) - area_at(now - window_);
    return static_cast<double>(area) * 1e-9;
}

LinkStats LinkMeter::snapshot(SimTime now) {
    expire_offers(now);
    LinkStats s;
    s.as_of = now;
    s.blr = offered_ == 0 ? 0.0 : static_cast<double>(dropped_) / static_cast<double>(offered_);
    double capacity = to_seconds(window_) * channels_;
    s.utilization = std::clamp(reserved_seconds(now) / capacity, 0.0, 1.0);
    s.blr = std::clamp(s.blr, 0.0, 1.0);
    return s;
}

KnowledgeBase::KnowledgeBase(NodeId owner, const Topology& topo)
    : owner_(owner), topo_(&topo), entries_(topo.directed_link_count()) {}

bool KnowledgeBase::ingest(NodeId from, NodeId to, const LinkStats& stats) {
    auto idx = topo_->find_link(from, to);
    if (!idx) {
        ++rejected_unknown_;
        return false;
    }
    return ingest(*idx, stats);
}

bool KnowledgeBase::ingest(LinkIndex link, const LinkStats& stats) {
    if (link >= entries_.size()) {
        ++rejected_unknown_;
        return false;
    }
    auto& slot = entries_[link];
    if (!slot) {
        slot = stats;
        ++known_;
        return true;
    }
    // Equal timestamps keep the incoming value.
    if (stats.as_of < slot->as_of) return false;
    slot = stats;
    return true;
}

std::pair<double, double> KnowledgeBase::network_aggregates() const {
    if (known_ == 0) return {0.0, 0.0};
    double blr = 0.0;
    double util = 0.0;
    for (const auto& e : entries_) {
        if (!e) continue;
        blr += e->blr;
        util += e->utilization;
    }
    const double n = static_cast<double>(known_);
    return {blr / n, util / n};
}

void KnowledgeBase::dump_csv(std::ostream& os) const {
    os << "link_src,link_dst,blr,utilization,as_of\n";
    auto old_precision = os.precision(12);
    for (LinkIndex i = 0; i < entries_.size(); ++i) {
        if (!entries_[i]) continue;
        DirectedLink dl = topo_->directed(i);
        os << dl.from.index << ',' << dl.to.index << ',' << entries_[i]->blr << ',' << entries_[i]->utilization << ','
           << to_seconds(entries_[i]->as_of) << '\n';
    }
    os.precision(old_precision);
}

Piggyback piggyback_for_nack(const Topology& topo, NodeId node, NodeId next, std::span<LinkMeter> meters, SimTime now) {
    LinkIndex idx = topo.link_index(node, next);
    return Piggyback{idx, meters[idx].snapshot(now)};
}

Piggyback piggyback_for_ack(const Topology& topo, NodeId dest, NodeId prev, std::span<LinkMeter> meters, SimTime now) {
    LinkIndex idx = topo.link_index(prev, dest);
    return Piggyback{idx, meters[idx].snapshot(now)};
}

} // namespace obs
