#pragma once

#include <chrono>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>

namespace obs {

/// Dense node index, 0..N-1 within one topology.
struct NodeId {
    std::uint32_t index = 0;

    constexpr NodeId() = default;
    constexpr explicit NodeId(std::uint32_t i) : index(i) {}

    constexpr auto operator<=>(const NodeId&) const = default;
};

/// Simulation clock. Integer nanoseconds keep offset arithmetic exact.
using Duration = std::chrono::nanoseconds;
using SimTime = std::chrono::nanoseconds;

constexpr double to_seconds(Duration d) { return std::chrono::duration<double>(d).count(); }

inline Duration from_seconds(double s) { return Duration(std::llround(s * 1e9)); }

/// Index of a directed link inside a Topology; 2*k and 2*k+1 are the two
/// directions of undirected link k.
using LinkIndex = std::uint32_t;

} // namespace obs

template <>
struct std::hash<obs::NodeId> {
    std::size_t operator()(const obs::NodeId& n) const noexcept { return std::hash<std::uint32_t>{}(n.index); }
};
