#include "obs/decision.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace obs {

namespace {

constexpr double kWeightTolerance = 1e-9;

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

double link_success(const KnowledgeBase& kb, LinkIndex link, const DpWeights& w) {
    const auto& e = kb.entry(link);
    if (!e) return 1.0;
    return 1.0 - dropping_probability(*e, w);
}

} // namespace

void DpWeights::validate() const {
    if (!in_unit(alpha_blr) || !in_unit(alpha_u)) throw std::invalid_argument("alpha weights must lie in [0,1]");
    if (std::abs(alpha_blr + alpha_u - 1.0) > kWeightTolerance)
        throw std::invalid_argument("alpha_blr + alpha_u must equal 1");
}

void ThresholdWeights::validate() const {
    if (!in_unit(beta_blr) || !in_unit(beta_u)) throw std::invalid_argument("beta weights must lie in [0,1]");
    if (beta_blr + beta_u > 1.0 + kWeightTolerance) throw std::invalid_argument("beta_blr + beta_u must not exceed 1");
}

double dropping_probability(const LinkStats& stats, const DpWeights& w) {
    return w.alpha_blr * stats.blr + w.alpha_u * stats.utilization;
}

double route_success_probability(const KnowledgeBase& kb, const Topology& topo, const Route& route,
                                 const DpWeights& w) {
    double sp = 1.0;
    for (std::size_t i = 0; i + 1 < route.hops.size(); ++i) {
        sp *= link_success(kb, topo.link_index(route.hops[i], route.hops[i + 1]), w);
    }
    return sp;
}

double route_cost(const KnowledgeBase& kb, const Topology& topo, const Route& route, const DpWeights& w) {
    return 1.0 - route_success_probability(kb, topo, route, w);
}

double decision_threshold(double blr_topo, double u_topo, const ThresholdWeights& w) {
    return w.beta_blr * blr_topo + w.beta_u * u_topo;
}

RoutingTable::RoutingTable(NodeId owner, std::uint32_t node_count) : owner_(owner), per_dst_(node_count) {}

RoutingTable rebuild_routing_table(NodeId node, const KnowledgeBase& kb, const Topology& topo, const RouteSet& routes,
                                   const DpWeights& w) {
    const std::uint32_t n = topo.node_count();
    std::vector<double> success(topo.directed_link_count());
    for (LinkIndex i = 0; i < success.size(); ++i) success[i] = link_success(kb, i, w);

    RoutingTable table(node, n);
    for (std::uint32_t d = 0; d < n; ++d) {
        if (d == node.index) continue;
        auto candidates = routes.routes(node, NodeId{d});
        auto& entries = table.per_dst_[d];
        entries.reserve(candidates.size());
        for (const Route& r : candidates) {
            double sp = 1.0;
            for (std::size_t i = 0; i + 1 < r.hops.size(); ++i) sp *= success[topo.link_index(r.hops[i], r.hops[i + 1])];
            entries.push_back(RoutingTable::Entry{&r, 1.0 - sp, sp});
        }
        // Candidates arrive in (hop count, node sequence) order, so a stable
        // sort on cost alone gives the full tie-break.
        std::stable_sort(entries.begin(), entries.end(),
                         [](const RoutingTable::Entry& a, const RoutingTable::Entry& b) { return a.cost < b.cost; });
    }
    return table;
}

std::string_view to_string(Scheme s) {
    switch (s) {
    case Scheme::Ahdr: return "ahdr";
    case Scheme::Mlhdr: return "mlhdr";
    case Scheme::RetransmitOnly: return "retransmit";
    case Scheme::DeflectOnly: return "deflect";
    }
    return "?";
}

Scheme parse_scheme(std::string_view s) {
    if (s == "ahdr") return Scheme::Ahdr;
    if (s == "mlhdr") return Scheme::Mlhdr;
    if (s == "retransmit") return Scheme::RetransmitOnly;
    if (s == "deflect") return Scheme::DeflectOnly;
    throw std::invalid_argument("unknown scheme '" + std::string(s) + "' (expected ahdr|mlhdr|retransmit|deflect)");
}

} // namespace obs
