#include "obs/protocol.hpp"

namespace obs {

std::size_t predict_hops(const RoutingTable& table, NodeId dst, const Route& shortest, double sp_th) {
    const NodeId primary_port = shortest.next_hop();
    for (const RoutingTable::Entry& e : table.entries(dst)) {
        if (e.next_hop() == primary_port) continue;
        if (deflection_allowed(e.success_probability(), sp_th)) return e.route->hop_count();
        break;
    }
    return shortest.hop_count();
}

RetransmissionOutcome schedule_retransmission(SimTime now, std::mt19937_64& rng, std::uint32_t n_ret,
                                              std::uint32_t count, Duration idle_max) {
    if (count >= n_ret) return GiveUp{};
    if (idle_max <= Duration::zero()) return RetransmitAt{now};
    std::uniform_int_distribution<Duration::rep> idle(0, idle_max.count() - 1);
    return RetransmitAt{now + Duration(idle(rng))};
}

} // namespace obs
