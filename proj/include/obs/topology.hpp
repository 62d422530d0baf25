#pragma once

#include "obs/types.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace obs {

struct Link {
    NodeId a;
    NodeId b;
    std::uint32_t data_channels = 4;
    std::uint32_t control_channels = 2;
    double channel_rate = 1e9; // bits per second, per wavelength
    Duration prop_delay = std::chrono::milliseconds(1);
};

/// One direction of a Link, as addressed by LinkIndex.
struct DirectedLink {
    NodeId from;
    NodeId to;
    const Link* link = nullptr;
};

/// Loop-free node sequence. hop_count() is |Route|.
struct Route {
    std::vector<NodeId> hops;

    std::size_t hop_count() const { return hops.empty() ? 0 : hops.size() - 1; }
    NodeId source() const { return hops.front(); }
    NodeId destination() const { return hops.back(); }
    NodeId next_hop() const { return hops.at(1); }
    bool contains(NodeId n) const;

    friend bool operator==(const Route&, const Route&) = default;
};

/// Ascending hop count, then lexicographic node sequence.
bool shorter_then_lexicographic(const Route& x, const Route& y);

/// Immutable undirected multi-wavelength graph. Construction validates every
/// invariant (connected, simple, sane channel parameters) and throws
/// std::invalid_argument otherwise.
class Topology {
public:
    Topology(std::string name, std::uint32_t node_count, std::vector<Link> links);

    const std::string& name() const { return name_; }
    std::uint32_t node_count() const { return node_count_; }
    std::span<const Link> links() const { return links_; }
    std::size_t directed_link_count() const { return 2 * links_.size(); }

    DirectedLink directed(LinkIndex idx) const;
    std::optional<LinkIndex> find_link(NodeId from, NodeId to) const;
    LinkIndex link_index(NodeId from, NodeId to) const; // throws std::out_of_range

    /// Neighbours in ascending id order.
    std::span<const NodeId> neighbors(NodeId n) const { return adjacency_.at(n.index); }

    /// Sum over directed links of data_channels * channel_rate (bits/s).
    double data_capacity() const;

private:
    std::string name_;
    std::uint32_t node_count_;
    std::vector<Link> links_;
    std::vector<std::vector<NodeId>> adjacency_;
    std::vector<std::optional<LinkIndex>> link_lookup_; // node_count^2, row = from
};

Topology build_nsfnet();
Topology build_cost239();

/// Parse the JSON topology format (see data/nsfnet.json).
Topology load_topology_file(const std::filesystem::path& path);
Topology parse_topology(std::string_view json_text, std::string name = "custom");

/// "nsfnet", "cost239", or a path to a topology file.
Topology make_topology(std::string_view selector);

/// L / (N(N-1)/2).
double connectivity(const Topology& topo);

/// Minimum-hop route; among equal lengths the lexicographically smallest node
/// sequence. Throws std::invalid_argument for src == dst, std::runtime_error if
/// dst is unreachable.
Route shortest_path(const Topology& topo, NodeId src, NodeId dst);

/// All loop-free routes with |R| <= |shortest| * xi, shortest first, ordered
/// by hop count then node sequence.
std::vector<Route> enumerate_routes(const Topology& topo, NodeId src, NodeId dst, double xi);

/// enumerate_routes for every ordered pair, computed once per (topology, xi).
class RouteSet {
public:
    RouteSet(const Topology& topo, double xi);

    std::span<const Route> routes(NodeId src, NodeId dst) const { return routes_.at(slot(src, dst)); }
    const Route& shortest(NodeId src, NodeId dst) const { return routes_.at(slot(src, dst)).front(); }
    double xi() const { return xi_; }
    std::uint32_t node_count() const { return node_count_; }

private:
    std::size_t slot(NodeId s, NodeId d) const { return std::size_t{s.index} * node_count_ + d.index; }

    std::uint32_t node_count_;
    double xi_;
    std::vector<std::vector<Route>> routes_;
};

} // namespace obs
