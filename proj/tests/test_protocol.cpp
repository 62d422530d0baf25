#include "obs/channel_schedule.hpp"
#include "obs/protocol.hpp"
#include "obs/traffic.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <map>
#include <random>
#include <set>

using namespace obs;
using std::chrono::microseconds;
using std::chrono::milliseconds;

namespace {

Link edge(std::uint32_t a, std::uint32_t b) {
    Link l;
    l.a = NodeId(a);
    l.b = NodeId(b);
    return l;
}

} // namespace

TEST_CASE("offset time") {
    OffsetParams p;
    CHECK(offset_time(p, 0) == p.t_conf);
    CHECK(offset_time(p, 3) == microseconds(40));
    for (std::size_t n = 0; n < 20; ++n) {
        CHECK(offset_time(p, 2 * n) - p.t_conf == 2 * (offset_time(p, n) - p.t_conf));
        CHECK(offset_time(p, n + 1) - offset_time(p, n) == p.t_p);
    }
}

TEST_CASE("offset sufficiency") {
    OffsetParams p;
    Bhp b;
    b.offset_remaining = offset_time(p, 2);
    CHECK(offset_sufficient(b, 2, p));
    b.offset_remaining = Duration::zero();
    CHECK_FALSE(offset_sufficient(b, 2, p));

    // Sized for a 2-hop path; a deflection at the ingress onto a 4-hop route.
    b.offset_remaining = offset_time(p, 2);
    CHECK(offset_sufficient(b, 2, p));
    b.offset_remaining -= p.t_p; // forwarded one hop
    CHECK_FALSE(offset_sufficient(b, 3, p));
}

TEST_CASE("predict_hops") {
    // 0-1 direct; 0-2-3-4-1 long detour.
    Topology t("ring", 5, {edge(0, 1), edge(0, 2), edge(2, 3), edge(3, 4), edge(4, 1)});
    RouteSet rs(t, 5.0);
    KnowledgeBase kb(NodeId(0), t);
    const Route& shortest = rs.shortest(NodeId(0), NodeId(1));
    RoutingTable table = rebuild_routing_table(NodeId(0), kb, t, rs, {});
    CHECK(predict_hops(table, NodeId(1), shortest, 0.2) == 4);
    CHECK(predict_hops(table, NodeId(1), shortest, 1.5) == 1);

    kb.ingest(NodeId(0), NodeId(2), LinkStats{1.0, 1.0, {}});
    table = rebuild_routing_table(NodeId(0), kb, t, rs, {});
    CHECK(predict_hops(table, NodeId(1), shortest, 0.2) == 1);

    Topology pair("pair", 2, {edge(0, 1)});
    RouteSet prs(pair, 2.0);
    KnowledgeBase pkb(NodeId(0), pair);
    RoutingTable pt = rebuild_routing_table(NodeId(0), pkb, pair, prs, {});
    CHECK(predict_hops(pt, NodeId(1), prs.shortest(NodeId(0), NodeId(1)), 0.0) == 1);
}

TEST_CASE("predict_hops ignores alternatives through the primary port") {
    // From 0 to 3: shortest 0-1-3; 0-1-2-3 shares port 1, 0-4-5-6-3 does not.
    Topology t("x", 7,
               {edge(0, 1), edge(1, 3), edge(1, 2), edge(2, 3), edge(0, 4), edge(4, 5), edge(5, 6), edge(6, 3)});
    RouteSet rs(t, 2.0);
    KnowledgeBase kb(NodeId(0), t);
    RoutingTable table = rebuild_routing_table(NodeId(0), kb, t, rs, {});
    REQUIRE(table.entries(NodeId(3)).size() == 3);
    CHECK(predict_hops(table, NodeId(3), rs.shortest(NodeId(0), NodeId(3)), 0.0) == 4);
}

TEST_CASE("retransmission scheduling") {
    std::mt19937_64 rng(1);
    SimTime now(milliseconds(100));
    for (int i = 0; i < 1000; ++i) {
        auto r = schedule_retransmission(now, rng, 1, 0);
        REQUIRE(std::holds_alternative<RetransmitAt>(r));
        SimTime at = std::get<RetransmitAt>(r).when;
        CHECK(at >= now);
        CHECK(at < now + milliseconds(50));
    }
    CHECK(std::holds_alternative<GiveUp>(schedule_retransmission(now, rng, 1, 1)));
    CHECK(std::holds_alternative<GiveUp>(schedule_retransmission(now, rng, 0, 0)));
    auto custom = schedule_retransmission(now, rng, 3, 2, milliseconds(5));
    REQUIRE(std::holds_alternative<RetransmitAt>(custom));
    CHECK(std::get<RetransmitAt>(custom).when < now + milliseconds(5));
}

TEST_CASE("try_reserve first fit and saturation") {
    Topology t = build_nsfnet();
    ChannelSchedule s(t);
    CHECK(s.channel_count(0) == 4);
    CHECK(s.try_reserve(0, SimTime(0), Duration(100)) == 0u);
    CHECK(s.try_reserve(0, SimTime(50), Duration(100)) == 1u);
    CHECK(s.try_reserve(0, SimTime(100), Duration(10)) == 0u); // touches, no overlap
    CHECK(s.try_reserve(0, SimTime(60), Duration(10)) == 2u);
    CHECK(s.try_reserve(0, SimTime(60), Duration(10)) == 3u);
    CHECK_FALSE(s.can_reserve(0, SimTime(65), Duration(1)));
    CHECK_FALSE(s.try_reserve(0, SimTime(65), Duration(1)).has_value());
    CHECK(s.try_reserve(1, SimTime(65), Duration(1)) == 0u); // other direction independent
    CHECK_THROWS(s.try_reserve(0, SimTime(500), Duration(0)));
    CHECK(s.audit());

    s.prune(SimTime(200));
    CHECK(s.intervals(0, 0).empty());
    CHECK(s.try_reserve(0, SimTime(65), Duration(1)) == 0u);
}

TEST_CASE("try_reserve agrees with brute-force overlap checking") {
    Topology t("pair", 2, {edge(0, 1)});
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        ChannelSchedule s(t);
        oracle::OverlapScheduler ref(4);
        for (int i = 0; i < 500; ++i) {
            std::int64_t start = static_cast<std::int64_t>(rng() % 10'000);
            std::int64_t dur = 1 + static_cast<std::int64_t>(rng() % 400);
            bool can = s.can_reserve(0, SimTime(start), Duration(dur));
            auto got = s.try_reserve(0, SimTime(start), Duration(dur));
            CHECK(got == ref.reserve(start, dur));
            CHECK(can == got.has_value());
        }
        CHECK(s.audit());
    }
}

TEST_CASE("traffic: silent source and rate arithmetic") {
    TrafficSource silent(NodeId(0), 14, 0.0, 400'000, BurstSizeLaw::Exponential, 1);
    CHECK_FALSE(silent.next().has_value());
    // 0.5 * 168 Gb/s over 14 generators with 3.2 Mb bursts.
    CHECK(per_generator_burst_rate(0.5, 168e9, 400'000, 14) == doctest::Approx(0.5 * 168e9 / 14 / 3.2e6));
}

TEST_CASE("traffic: Poisson inter-arrivals, burst sizes and destinations") {
    const double rate = 250.0;
    const double mean = 400'000.0;
    TrafficSource src(NodeId(3), 14, rate, mean, BurstSizeLaw::Exponential, 12345);
    const int n = 100'000;
    double sum_size = 0;
    std::map<std::uint32_t, int> dests;
    SimTime last{0};
    for (int i = 0; i < n; ++i) {
        auto a = src.next();
        REQUIRE(a.has_value());
        CHECK(a->src == NodeId(3));
        CHECK(a->dst != NodeId(3));
        CHECK(a->time >= last);
        last = a->time;
        sum_size += static_cast<double>(a->size_bytes);
        ++dests[a->dst.index];
    }
    CHECK(to_seconds(last) / n == doctest::Approx(1.0 / rate).epsilon(0.02));
    CHECK(sum_size / n == doctest::Approx(mean).epsilon(0.02));
    CHECK(dests.size() == 13);
    for (auto [d, c] : dests) CHECK(c == doctest::Approx(n / 13.0).epsilon(0.05));
}

TEST_CASE("traffic: constant sizes and reproducible streams") {
    TrafficSource a(NodeId(0), 5, 10.0, 1000, BurstSizeLaw::Constant, 7);
    TrafficSource b(NodeId(0), 5, 10.0, 1000, BurstSizeLaw::Constant, 7);
    for (int i = 0; i < 100; ++i) {
        auto x = a.next();
        auto y = b.next();
        CHECK(x->size_bytes == 1000);
        CHECK(x->time == y->time);
        CHECK(x->dst == y->dst);
    }
    CHECK(parse_burst_size_law("constant") == BurstSizeLaw::Constant);
    CHECK(parse_burst_size_law(to_string(BurstSizeLaw::Exponential)) == BurstSizeLaw::Exponential);
    CHECK_THROWS(parse_burst_size_law("poisson-ish"));
}

TEST_CASE("generator selection") {
    auto all = select_generators(14, false, 0, 1);
    CHECK(all.size() == 14);
    auto some = select_generators(14, true, 5, 1);
    CHECK(some.size() == 5);
    CHECK(std::is_sorted(some.begin(), some.end()));
    CHECK(std::set<NodeId>(some.begin(), some.end()).size() == 5);
    CHECK(some == select_generators(14, true, 5, 1));
    CHECK(derive_seed(1, 2) != derive_seed(1, 3));
    CHECK(derive_seed(1, 2) == derive_seed(1, 2));
}
