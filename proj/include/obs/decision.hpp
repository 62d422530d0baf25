#pragma once

#include "obs/statistics.hpp"
#include "obs/topology.hpp"

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace obs {

/// Weights on link BLR and utilization for the dropping probability. Must sum to 1.
struct DpWeights {
    double alpha_blr = 0.5;
    double alpha_u = 0.5;

    void validate() const; // throws std::invalid_argument
};

/// Weights on the network aggregates for the adaptive threshold. Sum at most 1.
struct ThresholdWeights {
    double beta_blr = 0.4;
    double beta_u = 0.2;

    void validate() const;
};

double dropping_probability(const LinkStats& stats, const DpWeights& w);

/// Product of (1 - DP) over the route's links as seen by `kb`. Links the kb has
/// never heard of read as idle.
double route_success_probability(const KnowledgeBase& kb, const Topology& topo, const Route& route, const DpWeights& w);

double route_cost(const KnowledgeBase& kb, const Topology& topo, const Route& route, const DpWeights& w);

double decision_threshold(double blr_topo, double u_topo, const ThresholdWeights& w);

/// Inclusive: deflect when the route is at least as likely to succeed as the threshold.
constexpr bool deflection_allowed(double sp, double sp_th) { return sp >= sp_th; }

/// Per-node table of alternatives toward each destination, cost-sorted.
class RoutingTable {
public:
    struct Entry {
        const Route* route;
        double cost;    // 1 - SP(route)
        double success; // SP(route)

        NodeId next_hop() const { return route->next_hop(); }
        double success_probability() const { return success; }
    };

    RoutingTable() = default;
    RoutingTable(NodeId owner, std::uint32_t node_count);

    NodeId owner() const { return owner_; }
    std::span<const Entry> entries(NodeId dst) const { return per_dst_.at(dst.index); }

    friend RoutingTable rebuild_routing_table(NodeId node, const KnowledgeBase& kb, const Topology& topo,
                                              const RouteSet& routes, const DpWeights& w);

private:
    NodeId owner_{};
    std::vector<std::vector<Entry>> per_dst_;
};

/// Costs every precomputed route from `node` against `kb` and sorts ascending by
/// cost; ties go to the shorter route, then the lexicographically smaller one.
RoutingTable rebuild_routing_table(NodeId node, const KnowledgeBase& kb, const Topology& topo, const RouteSet& routes,
                                   const DpWeights& w);

enum class Scheme { Ahdr, Mlhdr, RetransmitOnly, DeflectOnly };

std::string_view to_string(Scheme s);
Scheme parse_scheme(std::string_view s); // ahdr | mlhdr | retransmit | deflect

struct SchemePolicy {
    Scheme scheme = Scheme::Ahdr;
    std::uint32_t max_deflections_per_burst = 1; // MLHDR only
};

struct Deflect {
    NodeId next_hop;
    const Route* route;
};
struct Retransmit {};
struct Drop {};
using ContentionDecision = std::variant<Deflect, Retransmit, Drop>;

/// Everything resolve_contention needs to know about the contended BHP.
struct ContentionContext {
    NodeId node;
    NodeId dst;
    NodeId contended_next;           // port that just failed
    std::span<const NodeId> visited; // route taken so far, ending with `node`
    std::uint32_t retransmissions = 0;
    std::uint32_t n_ret = 1;
    std::uint32_t burst_deflections = 0; // over the burst's whole lifetime
};

namespace detail {

inline bool admissible(const Route& r, const ContentionContext& ctx, std::span<const NodeId> tried) {
    NodeId next = r.next_hop();
    if (next == ctx.contended_next) return false;
    if (std::find(tried.begin(), tried.end(), next) != tried.end()) return false;
    // Loop-free with respect to where the BHP has already been.
    for (std::size_t i = 1; i < r.hops.size(); ++i) {
        if (std::find(ctx.visited.begin(), ctx.visited.end(), r.hops[i]) != ctx.visited.end()) return false;
    }
    return true;
}

inline ContentionDecision fallback(const ContentionContext& ctx) {
    if (ctx.retransmissions < ctx.n_ret) return Retransmit{};
    return Drop{};
}

} // namespace detail

/// Picks Deflect / Retransmit / Drop for a BHP whose primary port is busy.
///
/// `port_free(next)` reports whether the crossing interval can be reserved on
/// (node -> next); busy ports are appended to `tried` and skipped, so a Deflect
/// returned here is always realisable. `by_length` is the node's static route
/// list toward ctx.dst (hop-count order) and drives MLHDR.
template <std::predicate<NodeId> PortFree>
ContentionDecision resolve_contention(const SchemePolicy& policy, const ContentionContext& ctx,
                                      const RoutingTable& table, std::span<const Route> by_length, double sp_th,
                                      std::vector<NodeId>& tried, PortFree&& port_free) {
    switch (policy.scheme) {
    case Scheme::RetransmitOnly:
        return detail::fallback(ctx);

    case Scheme::Ahdr:
    case Scheme::DeflectOnly:
        for (const RoutingTable::Entry& e : table.entries(ctx.dst)) {
            if (!detail::admissible(*e.route, ctx, tried)) continue;
            if (!port_free(e.next_hop())) {
                tried.push_back(e.next_hop());
                continue;
            }
            if (policy.scheme == Scheme::DeflectOnly) return Deflect{e.next_hop(), e.route};
            // Best remaining alternative; cost order means nothing later can pass.
            if (deflection_allowed(e.success_probability(), sp_th)) return Deflect{e.next_hop(), e.route};
            return detail::fallback(ctx);
        }
        return policy.scheme == Scheme::DeflectOnly ? ContentionDecision{Drop{}} : detail::fallback(ctx);

    case Scheme::Mlhdr:
        if (ctx.burst_deflections < policy.max_deflections_per_burst) {
            for (const Route& r : by_length) {
                if (!detail::admissible(r, ctx, tried)) continue;
                if (!port_free(r.next_hop())) {
                    tried.push_back(r.next_hop());
                    continue;
                }
                return Deflect{r.next_hop(), &r};
            }
        }
        return detail::fallback(ctx);
    }
    return Drop{};
}

} // namespace obs
