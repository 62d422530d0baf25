// Acceptance suite: one PASS/FAIL line per criterion.
//
// Exit status is 0 when the set of failing criteria equals --expect-fail
// (empty by default), so a known, documented failure does not hide a new one.

#include "obs/batch.hpp"
#include "obs/channel_schedule.hpp"
#include "obs/decision.hpp"
#include "obs/metrics.hpp"
#include "obs/protocol.hpp"
#include "obs/regression.hpp"
#include "obs/simulator.hpp"
#include "obs/sweep.hpp"
#include "obs/topology.hpp"
#include "oracles.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace obs;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// Collects failed example descriptions.
struct Checker {
    int total = 0;
    std::vector<std::string> failed;

    void expect(bool ok, const std::string& what) {
        ++total;
        if (!ok) failed.push_back(what);
    }
    void near(double got, double want, const std::string& what, double tol = 1e-12) {
        expect(std::abs(got - want) <= tol, what + " (got " + fmt("%.17g", got) + ")");
    }
    Verdict verdict() const {
        Verdict v;
        v.pass = failed.empty();
        v.detail = std::to_string(total - static_cast<int>(failed.size())) + "/" + std::to_string(total) + " checks";
        for (const auto& f : failed) v.detail += "; failed: " + f;
        return v;
    }
};

Link edge(std::uint32_t a, std::uint32_t b) {
    Link l;
    l.a = NodeId(a);
    l.b = NodeId(b);
    return l;
}

// ---------------------------------------------------------------------------

Verdict connectivity_values() {
    const double n = connectivity(build_nsfnet());
    const double c = connectivity(build_cost239());
    Verdict v;
    v.pass = std::abs(n - 0.23) <= 0.005 && std::abs(c - 0.47) <= 0.005;
    v.detail = "nsfnet " + fmt("%.4f", n) + ", cost239 " + fmt("%.4f", c);
    return v;
}

Verdict formula_examples() {
    Checker ck;
    using std::chrono::microseconds;

    // Dropping probability.
    ck.near(dropping_probability({0.0, 0.0, {}}, {0.3, 0.7}), 0.0, "DP of idle link");
    ck.near(dropping_probability({0.37, 0.9, {}}, {1.0, 0.0}), 0.37, "DP weight selects BLR");
    ck.near(dropping_probability({0.2, 0.4, {}}, {0.5, 0.5}), 0.3, "DP (0.2,0.4) equal weights");

    // Route success probability and cost on the path 0-1-2.
    Topology path("path", 3, {edge(0, 1), edge(1, 2)});
    const DpWeights blr_only{1.0, 0.0};
    Route r01{{NodeId(0), NodeId(1)}};
    Route r012{{NodeId(0), NodeId(1), NodeId(2)}};
    KnowledgeBase idle(NodeId(0), path);
    ck.near(route_success_probability(idle, path, r012, {}), 1.0, "SP with all DP 0");
    ck.near(route_cost(idle, path, r012, {}), 0.0, "cost of SP 1");
    KnowledgeBase kb(NodeId(0), path);
    kb.ingest(NodeId(0), NodeId(1), {0.1, 0.0, {}});
    kb.ingest(NodeId(1), NodeId(2), {0.2, 0.0, {}});
    ck.near(route_success_probability(kb, path, r01, blr_only), 0.9, "SP of one link with DP 0.1");
    ck.near(route_success_probability(kb, path, r012, blr_only), 0.72, "SP of links with DP 0.1 and 0.2");
    ck.near(route_cost(kb, path, r012, blr_only), 0.28, "cost of SP 0.72");
    ck.near(route_cost(kb, path, r012, blr_only) + route_success_probability(kb, path, r012, blr_only), 1.0,
            "cost + SP");

    // Threshold and deflection-allowed predicate.
    ck.near(decision_threshold(0.8, 0.9, {0.0, 0.0}), 0.0, "threshold with zero weights");
    ck.near(decision_threshold(0.5, 0.5, {0.4, 0.2}), 0.3, "threshold (0.5,0.5) default weights");
    ck.near(decision_threshold(0.37, 0.0, {0.55, 0.0}), 0.2035, "threshold at BLR 0.37");
    ck.expect(deflection_allowed(0.25, 0.25), "DA inclusive boundary");
    ck.expect(deflection_allowed(0.9, 0.2), "DA 0.9 vs 0.2");
    ck.expect(!deflection_allowed(0.1, 0.2), "DA 0.1 vs 0.2");

    // Offset time and sufficiency.
    OffsetParams p{microseconds(10), microseconds(10)};
    ck.expect(offset_time(p, 0) == p.t_conf, "offset of 0 hops");
    ck.expect(offset_time(p, 3) == microseconds(40), "offset of 3 hops");
    ck.expect(offset_time(p, 8) - p.t_conf == 2 * (offset_time(p, 4) - p.t_conf), "offset hop term linear");
    Bhp b;
    b.offset_remaining = offset_time(p, 2);
    ck.expect(offset_sufficient(b, 2, p), "offset sufficiency inclusive");
    b.offset_remaining = Duration::zero();
    ck.expect(!offset_sufficient(b, 2, p), "zero offset with 2 hops left");
    b.offset_remaining = offset_time(p, 2) - p.t_p;
    ck.expect(offset_sufficient(b, 1, p) && !offset_sufficient(b, 3, p), "deflection from 2 to 4 hops");

    // Hop prediction on 0-1 plus the 5-hop detour 0-2-3-4-5-1.
    Topology ring("ring", 6, {edge(0, 1), edge(0, 2), edge(2, 3), edge(3, 4), edge(4, 5), edge(5, 1)});
    RouteSet rs(ring, 5.0);
    KnowledgeBase rkb(NodeId(0), ring);
    const Route& shortest = rs.shortest(NodeId(0), NodeId(1));
    ck.expect(predict_hops(rebuild_routing_table(NodeId(0), rkb, ring, rs, {}), NodeId(1), shortest, 0.2) == 5,
              "predict 5-hop alternative");
    rkb.ingest(NodeId(0), NodeId(2), {1.0, 1.0, {}});
    ck.expect(predict_hops(rebuild_routing_table(NodeId(0), rkb, ring, rs, {}), NodeId(1), shortest, 0.2) == 1,
              "predict falls back below threshold");
    Topology pair("pair", 2, {edge(0, 1)});
    RouteSet prs(pair, 2.0);
    KnowledgeBase pkb(NodeId(0), pair);
    ck.expect(predict_hops(rebuild_routing_table(NodeId(0), pkb, pair, prs, {}), NodeId(1),
                           prs.shortest(NodeId(0), NodeId(1)), 0.0) == 1,
              "predict without alternatives");

    // Deflection ratio.
    SimMetrics m;
    m.retransmissions = 10;
    ck.near(deflection_ratio(m), 0.0, "ratio without deflections");
    m.deflections = 10;
    ck.near(deflection_ratio(m), 0.5, "ratio 10/20");
    m.retransmissions = 0;
    ck.near(deflection_ratio(m), 1.0, "ratio with deflections only");
    m = SimMetrics{};
    ck.near(deflection_ratio(m), 0.0, "ratio with no events");
    return ck.verdict();
}

Verdict routing_table_order() {
    Topology t = build_nsfnet();
    RouteSet rs(t, 2.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    int bad = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        NodeId node(static_cast<std::uint32_t>(rng() % t.node_count()));
        DpWeights w;
        w.alpha_blr = u(rng);
        w.alpha_u = 1.0 - w.alpha_blr;
        KnowledgeBase kb(node, t);
        std::map<LinkIndex, LinkStats> known;
        for (LinkIndex l = 0; l < t.directed_link_count(); ++l) {
            if (rng() % 4 == 0) continue;
            LinkStats s{u(rng), u(rng), {}};
            kb.ingest(l, s);
            known[l] = s;
        }
        RoutingTable table = rebuild_routing_table(node, kb, t, rs, w);
        for (std::uint32_t d = 0; d < t.node_count(); ++d) {
            if (d == node.index) continue;
            auto routes = rs.routes(node, NodeId(d));
            std::vector<std::pair<double, const Route*>> ref;
            for (const Route& r : routes) {
                double sp = 1.0;
                for (std::size_t k = 0; k + 1 < r.hops.size(); ++k) {
                    auto it = known.find(t.link_index(r.hops[k], r.hops[k + 1]));
                    if (it != known.end()) sp *= 1.0 - (w.alpha_blr * it->second.blr + w.alpha_u * it->second.utilization);
                }
                ref.push_back({1.0 - sp, &r});
            }
            std::stable_sort(ref.begin(), ref.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
            auto got = table.entries(NodeId(d));
            if (got.size() != ref.size()) {
                ++bad;
                continue;
            }
            for (std::size_t i = 0; i < got.size(); ++i) {
                const bool same = *got[i].route == *ref[i].second;
                if (std::abs(got[i].cost - ref[i].first) > 1e-12 || (!same && std::abs(got[i].cost - ref[i].first) > 0)) {
                    ++bad;
                    break;
                }
                if (i + 1 < got.size() && got[i].cost > got[i + 1].cost) {
                    ++bad;
                    break;
                }
            }
        }
    }
    return {bad == 0, "1000 knowledge bases, " + std::to_string(bad) + " mis-ordered destination lists"};
}

Verdict route_enumeration() {
    std::mt19937_64 rng(8);
    int graphs = 0, pairs = 0, bad = 0;
    while (graphs < 100) {
        const std::uint32_t n = 2 + static_cast<std::uint32_t>(rng() % 7);
        Topology t = oracle::random_connected_graph(rng, n, 0.4);
        ++graphs;
        auto adj = oracle::adjacency(t);
        const double xi = std::array{1.0, 1.5, 2.0, 3.0}[rng() % 4];
        for (std::uint32_t s = 0; s < n; ++s) {
            for (std::uint32_t d = 0; d < n; ++d) {
                if (s == d) continue;
                ++pairs;
                std::set<oracle::Path> got;
                for (const Route& r : enumerate_routes(t, NodeId(s), NodeId(d), xi)) got.insert(oracle::to_path(r));
                if (got != oracle::bounded_paths(adj, s, d, xi)) ++bad;
            }
        }
    }
    return {bad == 0, std::to_string(graphs) + " graphs, " + std::to_string(pairs) + " pairs, " + std::to_string(bad) +
                          " mismatches"};
}

Verdict scheduler_oracle() {
    Topology t("pair", 2, {edge(0, 1)});
    std::mt19937_64 rng(21);
    int calls = 0, bad = 0;
    while (calls < 10'000) {
        ChannelSchedule s(t);
        oracle::OverlapScheduler ref(4);
        for (int i = 0; i < 500; ++i, ++calls) {
            const std::int64_t start = static_cast<std::int64_t>(rng() % 20'000);
            const std::int64_t dur = 1 + static_cast<std::int64_t>(rng() % 600);
            if (s.try_reserve(0, SimTime(start), Duration(dur)) != ref.reserve(start, dur)) ++bad;
        }
        if (!s.audit()) ++bad;
    }
    return {bad == 0, std::to_string(calls) + " calls, " + std::to_string(bad) + " disagreements"};
}

Verdict conservation_and_determinism() {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> load(0.1, 0.9);
    const Scheme schemes[] = {Scheme::Ahdr, Scheme::Mlhdr, Scheme::RetransmitOnly, Scheme::DeflectOnly};
    int conservation_bad = 0, determinism_bad = 0;
    for (int i = 0; i < 20; ++i) {
        SimConfig c;
        c.topology = i % 2 ? "cost239" : "nsfnet";
        c.policy.scheme = schemes[(i / 2) % 4];
        c.load = load(rng);
        c.seed = rng();
        c.duration = std::chrono::seconds(5);
        RunOptions o;
        o.keep_samples = false;
        std::string csv[2];
        for (int rep = 0; rep < 2; ++rep) {
            Simulator sim(c, o);
            SimMetrics m = sim.run();
            if (m.bursts_generated != m.bursts_delivered + m.bursts_lost + sim.tracked_in_flight()) ++conservation_bad;
            std::ostringstream os;
            write_runs_csv_row(os, m);
            csv[rep] = os.str();
        }
        if (csv[0] != csv[1]) ++determinism_bad;
    }
    return {conservation_bad == 0 && determinism_bad == 0,
            "20 configs, " + std::to_string(conservation_bad) + " conservation and " + std::to_string(determinism_bad) +
                " determinism violations"};
}

// Shared batch for the comparative criteria.
struct Comparison {
    std::vector<RunAggregate> ahdr; // per (topology, load)
    std::vector<RunAggregate> mlhdr;
    bool ready = false;
};

Comparison& comparison() {
    static Comparison cmp;
    if (cmp.ready) return cmp;
    std::vector<SimConfig> cells;
    for (const char* topo : {"nsfnet", "cost239"}) {
        for (double load : {0.2, 0.5, 0.8}) {
            for (Scheme s : {Scheme::Ahdr, Scheme::Mlhdr}) {
                for (std::uint64_t seed = 1; seed <= 10; ++seed) {
                    SimConfig c;
                    c.topology = topo;
                    c.load = load;
                    c.policy.scheme = s;
                    c.seed = seed;
                    c.duration = std::chrono::seconds(60);
                    cells.push_back(c);
                }
            }
        }
    }
    auto runs = run_batch(cells);
    for (const RunAggregate& a : aggregate_runs(runs)) (a.scheme == "ahdr" ? cmp.ahdr : cmp.mlhdr).push_back(a);
    for (std::size_t i = 0; i < cmp.ahdr.size(); ++i) {
        const auto& a = cmp.ahdr[i];
        const auto& m = cmp.mlhdr[i];
        std::printf("    %-8s load %.1f  blr ahdr %.4f mlhdr %.4f  delay ahdr %.5f mlhdr %.5f  defl-ratio ahdr %.3f\n",
                    a.topology.c_str(), a.load, a.mean_blr, m.mean_blr, a.mean_delay_s, m.mean_delay_s,
                    a.mean_deflection_ratio);
    }
    cmp.ready = true;
    return cmp;
}

Verdict comparative_blr() {
    const Comparison& c = comparison();
    int strictly = 0;
    bool never_worse = true;
    for (std::size_t i = 0; i < c.ahdr.size(); ++i) {
        if (c.ahdr[i].mean_blr > c.mlhdr[i].mean_blr) never_worse = false;
        if (c.ahdr[i].mean_blr < c.mlhdr[i].mean_blr) ++strictly;
    }
    return {never_worse && strictly >= 4 && c.ahdr.size() == 6,
            "AHDR lower in " + std::to_string(strictly) + "/6 cells" + (never_worse ? "" : ", higher in some cell")};
}

Verdict low_load_deflection() {
    const Comparison& c = comparison();
    Verdict v;
    for (const RunAggregate& a : c.ahdr) {
        if (a.load > 0.25) continue;
        if (a.mean_deflection_ratio < 0.8) v.pass = false;
        v.detail += (v.detail.empty() ? "" : ", ") + a.topology + " " + fmt("%.3f", a.mean_deflection_ratio);
    }
    v.detail = "AHDR deflection ratio at load 0.2: " + v.detail + " (need >= 0.8)";
    return v;
}

Verdict delay_sanity() {
    const Comparison& c = comparison();
    double worst = 0;
    for (std::size_t i = 0; i < c.ahdr.size(); ++i) worst = std::max(worst, c.ahdr[i].mean_delay_s / c.mlhdr[i].mean_delay_s);
    return {worst <= 1.5, "worst AHDR/MLHDR delay ratio " + fmt("%.3f", worst)};
}

Verdict degenerate_modes() {
    int contentions = 0, with_free_alt = 0, bad_zero = 0, bad_high = 0;
    for (const char* topo : {"nsfnet", "cost239"}) {
        for (std::uint64_t seed : {1, 2}) {
            SimConfig base;
            base.topology = topo;
            base.load = 0.5;
            base.seed = seed;
            base.duration = std::chrono::seconds(10);

            SimConfig zero = base;
            zero.pinned_threshold = 0.0;
            std::ostringstream trace;
            RunOptions o;
            o.keep_samples = false;
            o.trace = &trace;
            run(zero, o);
            std::istringstream in(trace.str());
            std::string line;
            while (std::getline(in, line)) {
                if (line.find(" CONTENTION ") == std::string::npos) continue;
                ++contentions;
                const auto pos = line.find("free_alts=");
                const bool free_alt = std::stoi(line.substr(pos + 10)) > 0;
                with_free_alt += free_alt;
                const bool deflected = line.find("outcome=deflect") != std::string::npos;
                if (free_alt && !deflected) ++bad_zero;
            }

            SimConfig high = base;
            high.pinned_threshold = 1.5;
            SimConfig retx = base;
            retx.policy.scheme = Scheme::RetransmitOnly;
            SimMetrics mh = run(high, batch_options());
            SimMetrics mr = run(retx, batch_options());
            if (mh.deflections != 0 || blr(mh) != blr(mr)) ++bad_high;
        }
    }
    return {bad_zero == 0 && bad_high == 0 && contentions > 0,
            "threshold 0: " + std::to_string(with_free_alt) + " of " + std::to_string(contentions) +
                " contentions had a free alternative, " + std::to_string(bad_zero) +
                " of those not deflected; threshold 1.5: " + std::to_string(bad_high) + " mismatching runs"};
}

Verdict regression_oracle() {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-100, 100);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        std::vector<std::pair<double, double>> pts(2 + rng() % 50);
        const double a = u(rng), b = u(rng), noise = std::abs(u(rng)) / 10;
        for (auto& p : pts) {
            const double x = u(rng);
            p = {x, a * x + b + noise * u(rng)};
        }
        RegressionFit f = linear_fit(pts);
        oracle::NormalFit o = oracle::normal_equation_fit(pts);
        worst = std::max({worst, std::abs(f.slope - static_cast<double>(o.slope)),
                          std::abs(f.intercept - static_cast<double>(o.intercept)),
                          std::abs(f.r_squared - static_cast<double>(o.r_squared))});
    }
    double worst_collinear = 0;
    for (int i = 0; i < 100; ++i) {
        std::vector<std::pair<double, double>> pts(2 + rng() % 20);
        const double a = u(rng), b = u(rng);
        for (auto& p : pts) {
            const double x = u(rng);
            p = {x, a * x + b};
        }
        worst_collinear = std::max(worst_collinear, std::abs(linear_fit(pts).r_squared - 1.0));
    }
    return {worst <= 1e-9 && worst_collinear <= 1e-9,
            "max deviation " + fmt("%.3g", worst) + ", collinear r2 error " + fmt("%.3g", worst_collinear)};
}

Verdict threshold_sweep_shape() {
    SimConfig base;
    base.duration = std::chrono::seconds(10);
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
    const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    Verdict v;
    v.pass = false;
    for (double load : {0.5, 0.7}) {
        ThresholdSweepResult r = threshold_sweep(base, load, grid, seeds);
        const bool interior = r.best_threshold != grid.front() && r.best_threshold != grid.back();
        v.pass = v.pass || interior;
        v.detail += (v.detail.empty() ? "" : ", ") + std::string("load ") + fmt("%.1f", load) + " argmin " +
                    fmt("%.1f", r.best_threshold);
    }
    return v;
}

struct Criterion {
    int id;
    const char* name;
    std::function<Verdict()> run;
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria for the OBS simulator"};
    std::vector<int> only;
    std::vector<int> expect_fail;
    app.add_option("--only", only, "run only these criteria")->delimiter(',');
    app.add_option("--expect-fail", expect_fail, "criteria documented as failing")->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria{
        {1, "connectivity of the reference topologies", connectivity_values},
        {2, "formula examples", formula_examples},
        {3, "routing tables cost-sorted", routing_table_order},
        {4, "route enumeration oracle", route_enumeration},
        {5, "channel scheduler oracle", scheduler_oracle},
        {6, "conservation and determinism", conservation_and_determinism},
        {7, "AHDR BLR not above MLHDR", comparative_blr},
        {8, "low-load deflection ratio", low_load_deflection},
        {9, "delay sanity", delay_sanity},
        {10, "degenerate thresholds", degenerate_modes},
        {11, "regression oracle", regression_oracle},
        {12, "interior best threshold", threshold_sweep_shape},
    };

    std::set<int> failed;
    for (const Criterion& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!v.pass) failed.insert(c.id);
        std::printf("criterion %2d %s  %s: %s [%.1fs]\n", c.id, v.pass ? "PASS" : "FAIL", c.name, v.detail.c_str(), secs);
        std::fflush(stdout);
    }

    std::set<int> expected;
    for (int id : expect_fail) {
        if (only.empty() || std::find(only.begin(), only.end(), id) != only.end()) expected.insert(id);
    }
    std::printf("%zu failing", failed.size());
    if (!expected.empty()) std::printf(", %zu expected to fail", expected.size());
    std::printf("\n");
    return failed == expected ? 0 : 1;
}
