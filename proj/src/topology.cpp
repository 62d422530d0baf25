#include "obs/topology.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace obs {

namespace {

using EdgeList = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

// 14-node / 21-link NSFNET as commonly used in OBS studies (0-based).
const EdgeList kNsfnetEdges = {
    {0, 1},  {0, 2},  {0, 7},   {1, 2},   {1, 3},   {2, 5},   {3, 4},
    {3, 10}, {4, 5},  {4, 6},   {5, 9},   {5, 13},  {6, 7},   {7, 8},
    {8, 9},  {8, 11}, {8, 12},  {10, 11}, {10, 12}, {11, 13}, {12, 13},
};

// 11-node / 26-link COST239 pan-European core.
// 0 Copenhagen, 1 London, 2 Amsterdam, 3 Berlin, 4 Brussels, 5 Luxembourg,
// 6 Prague, 7 Paris, 8 Zurich, 9 Vienna, 10 Milan
const EdgeList kCost239Edges = {
    {0, 1}, {0, 2}, {0, 3}, {0, 6},  {1, 2},  {1, 4},  {1, 7},  {2, 3},  {2, 4},
    {2, 5}, {3, 6}, {3, 7}, {3, 9},  {4, 5},  {4, 7},  {4, 10}, {5, 6},  {5, 7},
    {5, 8}, {6, 8}, {6, 9}, {7, 8},  {7, 10}, {8, 9},  {8, 10}, {9, 10},
};

Topology from_edges(std::string name, std::uint32_t n, const EdgeList& edges) {
    std::vector<Link> links;
    links.reserve(edges.size());
    for (auto [a, b] : edges) {
        links.push_back(Link{.a = NodeId{a}, .b = NodeId{b}});
    }
    return Topology(std::move(name), n, std::move(links));
}

// Hop distances from `to` to every node.
std::vector<int> bfs_distances(const Topology& topo, NodeId to) {
    std::vector<int> dist(topo.node_count(), -1);
    std::deque<NodeId> queue{to};
    dist[to.index] = 0;
    while (!queue.empty()) {
        NodeId u = queue.front();
        queue.pop_front();
        for (NodeId v : topo.neighbors(u)) {
            if (dist[v.index] < 0) {
                dist[v.index] = dist[u.index] + 1;
                queue.push_back(v);
            }
        }
    }
    return dist;
}

void dfs_routes(const Topology& topo, NodeId dst, std::size_t max_hops, std::vector<NodeId>& path,
                std::vector<bool>& on_path, const std::vector<int>& dist_to_dst, std::vector<Route>& out) {
    NodeId u = path.back();
    if (u == dst) {
        out.push_back(Route{path});
        return;
    }
    std::size_t used = path.size() - 1;
    for (NodeId v : topo.neighbors(u)) {
        if (on_path[v.index]) continue;
        // Prune: even a shortest continuation would exceed the bound.
        if (used + 1 + static_cast<std::size_t>(dist_to_dst[v.index]) > max_hops) continue;
        on_path[v.index] = true;
        path.push_back(v);
        dfs_routes(topo, dst, max_hops, path, on_path, dist_to_dst, out);
        path.pop_back();
        on_path[v.index] = false;
    }
}

} // namespace

bool Route::contains(NodeId n) const { return std::find(hops.begin(), hops.end(), n) != hops.end(); }

bool shorter_then_lexicographic(const Route& x, const Route& y) {
    if (x.hops.size() != y.hops.size()) return x.hops.size() < y.hops.size();
    return x.hops < y.hops;
}

Topology::Topology(std::string name, std::uint32_t node_count, std::vector<Link> links)
    : name_(std::move(name)), node_count_(node_count), links_(std::move(links)) {
    if (node_count_ < 2) throw std::invalid_argument("topology: node_count must be at least 2");
    adjacency_.resize(node_count_);
    link_lookup_.assign(std::size_t{node_count_} * node_count_, std::nullopt);

    for (std::size_t k = 0; k < links_.size(); ++k) {
        const Link& l = links_[k];
        std::ostringstream where;
        where << "topology: link " << k << " (" << l.a.index << "," << l.b.index << ")";
        if (l.a.index >= node_count_ || l.b.index >= node_count_)
            throw std::invalid_argument(where.str() + ": endpoint out of range");
        if (l.a == l.b) throw std::invalid_argument(where.str() + ": endpoints must be distinct");
        if (l.data_channels < 1) throw std::invalid_argument(where.str() + ": data_channels must be >= 1");
        if (l.control_channels < 1) throw std::invalid_argument(where.str() + ": control_channels must be >= 1");
        if (!(l.channel_rate > 0)) throw std::invalid_argument(where.str() + ": channel_rate must be > 0");
        if (l.prop_delay < Duration::zero()) throw std::invalid_argument(where.str() + ": prop_delay must be >= 0");

        auto& fwd = link_lookup_[std::size_t{l.a.index} * node_count_ + l.b.index];
        auto& rev = link_lookup_[std::size_t{l.b.index} * node_count_ + l.a.index];
        if (fwd) throw std::invalid_argument(where.str() + ": duplicate link");
        fwd = static_cast<LinkIndex>(2 * k);
        rev = static_cast<LinkIndex>(2 * k + 1);
        adjacency_[l.a.index].push_back(l.b);
        adjacency_[l.b.index].push_back(l.a);
    }
    for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());

    auto dist = bfs_distances(*this, NodeId{0});
    if (std::any_of(dist.begin(), dist.end(), [](int d) { return d < 0; }))
        throw std::invalid_argument("topology '" + name_ + "' is not connected");
}

DirectedLink Topology::directed(LinkIndex idx) const {
    const Link& l = links_.at(idx / 2);
    return (idx % 2 == 0) ? DirectedLink{l.a, l.b, &l} : DirectedLink{l.b, l.a, &l};
}

std::optional<LinkIndex> Topology::find_link(NodeId from, NodeId to) const {
    if (from.index >= node_count_ || to.index >= node_count_) return std::nullopt;
    return link_lookup_[std::size_t{from.index} * node_count_ + to.index];
}

LinkIndex Topology::link_index(NodeId from, NodeId to) const {
    auto idx = find_link(from, to);
    if (!idx) {
        throw std::out_of_range("no link " + std::to_string(from.index) + "->" + std::to_string(to.index));
    }
    return *idx;
}

double Topology::data_capacity() const {
    double total = 0.0;
    for (const Link& l : links_) total += 2.0 * l.data_channels * l.channel_rate;
    return total;
}

Topology build_nsfnet() { return from_edges("nsfnet", 14, kNsfnetEdges); }

Topology build_cost239() { return from_edges("cost239", 11, kCost239Edges); }

namespace {

void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<std::string_view> known, const char* where) {
    if (!obj.is_object()) throw std::invalid_argument(std::string("topology file: ") + where + " must be an object");
    for (const auto& item : obj.items()) {
        if (std::find(known.begin(), known.end(), item.key()) == known.end())
            throw std::invalid_argument("topology file: unknown key '" + item.key() + "' in " + where);
    }
}

} // namespace

Topology parse_topology(std::string_view json_text, std::string name) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("topology file: " + std::string(e.what()));
    }
    try {
        reject_unknown_keys(doc, {"name", "nodes", "defaults", "links"}, "top level");
        if (doc.contains("name")) name = doc.at("name").get<std::string>();
        auto n = doc.at("nodes").get<std::uint32_t>();

        Link defaults;
        if (doc.contains("defaults")) {
            const json& d = doc.at("defaults");
            reject_unknown_keys(d, {"data_channels", "control_channels", "channel_rate", "prop_delay"}, "defaults");
            defaults.data_channels = d.value("data_channels", defaults.data_channels);
            defaults.control_channels = d.value("control_channels", defaults.control_channels);
            defaults.channel_rate = d.value("channel_rate", defaults.channel_rate);
            if (d.contains("prop_delay")) defaults.prop_delay = from_seconds(d.at("prop_delay").get<double>());
        }

        std::vector<Link> links;
        for (const json& e : doc.at("links")) {
            Link l = defaults;
            if (e.is_array()) {
                l.a = NodeId{e.at(0).get<std::uint32_t>()};
                l.b = NodeId{e.at(1).get<std::uint32_t>()};
            } else {
                reject_unknown_keys(e, {"a", "b", "data_channels", "control_channels", "channel_rate", "prop_delay"},
                                    "link");
                l.a = NodeId{e.at("a").get<std::uint32_t>()};
                l.b = NodeId{e.at("b").get<std::uint32_t>()};
                l.data_channels = e.value("data_channels", l.data_channels);
                l.control_channels = e.value("control_channels", l.control_channels);
                l.channel_rate = e.value("channel_rate", l.channel_rate);
                if (e.contains("prop_delay")) l.prop_delay = from_seconds(e.at("prop_delay").get<double>());
            }
            links.push_back(l);
        }
        return Topology(std::move(name), n, std::move(links));
    } catch (const json::exception& e) {
        throw std::invalid_argument("topology file: " + std::string(e.what()));
    }
}

Topology load_topology_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open topology file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_topology(buf.str(), path.stem().string());
}

Topology make_topology(std::string_view selector) {
    if (selector == "nsfnet") return build_nsfnet();
    if (selector == "cost239") return build_cost239();
    return load_topology_file(std::filesystem::path(selector));
}

double connectivity(const Topology& topo) {
    double n = topo.node_count();
    return static_cast<double>(topo.links().size()) / (n * (n - 1.0) / 2.0);
}

Route shortest_path(const Topology& topo, NodeId src, NodeId dst) {
    if (src == dst) throw std::invalid_argument("shortest_path: src == dst");
    if (src.index >= topo.node_count() || dst.index >= topo.node_count())
        throw std::invalid_argument("shortest_path: node out of range");
    auto dist = bfs_distances(topo, dst);
    if (dist[src.index] < 0) throw std::runtime_error("shortest_path: destination unreachable");

    // Greedy descent on the distance field; neighbours are sorted, so the first
    // admissible one yields the lexicographically smallest sequence.
    Route r;
    r.hops.push_back(src);
    NodeId u = src;
    while (u != dst) {
        for (NodeId v : topo.neighbors(u)) {
            if (dist[v.index] == dist[u.index] - 1) {
                u = v;
                break;
            }
        }
        r.hops.push_back(u);
    }
    return r;
}

std::vector<Route> enumerate_routes(const Topology& topo, NodeId src, NodeId dst, double xi) {
    if (src == dst) throw std::invalid_argument("enumerate_routes: src == dst");
    if (!(xi >= 1.0)) throw std::invalid_argument("enumerate_routes: xi must be >= 1");
    auto dist = bfs_distances(topo, dst);
    if (dist[src.index] < 0) throw std::runtime_error("enumerate_routes: destination unreachable");

    // |R| <= |primary| * xi; the epsilon absorbs representation error of xi.
    const auto max_hops = static_cast<std::size_t>(std::floor(dist[src.index] * xi + 1e-9));

    std::vector<Route> out;
    std::vector<NodeId> path{src};
    std::vector<bool> on_path(topo.node_count(), false);
    on_path[src.index] = true;
    dfs_routes(topo, dst, max_hops, path, on_path, dist, out);
    std::sort(out.begin(), out.end(), shorter_then_lexicographic);
    return out;
}

RouteSet::RouteSet(const Topology& topo, double xi) : node_count_(topo.node_count()), xi_(xi) {
    routes_.resize(std::size_t{node_count_} * node_count_);
    for (std::uint32_t s = 0; s < node_count_; ++s) {
        for (std::uint32_t d = 0; d < node_count_; ++d) {
            if (s == d) continue;
            routes_[slot(NodeId{s}, NodeId{d})] = enumerate_routes(topo, NodeId{s}, NodeId{d}, xi);
        }
    }
}

} // namespace obs
