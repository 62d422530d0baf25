#include "obs/batch.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <iterator>
#include <ostream>
#include <string>
#include <tuple>

#include <omp.h>

namespace obs {

RunOptions batch_options() {
    RunOptions o;
    o.keep_samples = false;
    return o;
}

std::vector<SimMetrics> run_batch(std::span<const SimConfig> configs, const RunOptions& opt) {
    if (opt.trace) throw std::invalid_argument("run_batch: tracing is not supported for parallel batches");
    const auto n = static_cast<std::int64_t>(configs.size());
    std::vector<SimMetrics> out(configs.size());
    std::vector<std::exception_ptr> errors(configs.size());

#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            out[i] = run(configs[i], opt);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }

    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i]) continue;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const std::exception& e) {
            throw std::runtime_error("batch cell " + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

std::vector<SimMetrics> run_batch_serial(std::span<const SimConfig> configs, const RunOptions& opt) {
    std::vector<SimMetrics> out;
    out.reserve(configs.size());
    for (std::size_t i = 0; i < configs.size(); ++i) {
        try {
            out.push_back(run(configs[i], opt));
        } catch (const std::exception& e) {
            throw std::runtime_error("batch cell " + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

std::pair<double, double> mean_stddev(std::span<const double> xs) {
    if (xs.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    if (xs.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

std::vector<RunAggregate> aggregate_runs(std::span<const SimMetrics> runs) {
    struct Acc {
        RunAggregate agg;
        std::vector<double> blrs;
        std::vector<double> delays;
        std::vector<double> ratios;
        std::vector<double> offsets;
    };
    std::vector<Acc> groups;
    for (const SimMetrics& m : runs) {
        auto it = std::find_if(groups.begin(), groups.end(), [&](const Acc& a) {
            return a.agg.scheme == m.scheme && a.agg.topology == m.topology && a.agg.load == m.load;
        });
        if (it == groups.end()) {
            groups.push_back(Acc{});
            it = std::prev(groups.end());
            it->agg.scheme = m.scheme;
            it->agg.topology = m.topology;
            it->agg.load = m.load;
        }
        RunAggregate& a = it->agg;
        ++a.runs;
        if (m.bursts_generated) it->blrs.push_back(blr(m));
        if (m.delay_count) it->delays.push_back(mean_end_to_end_delay(m));
        it->ratios.push_back(deflection_ratio(m));
        it->offsets.push_back(mean_offset(m));
        a.deflections += m.deflections;
        a.retransmissions += m.retransmissions;
        a.generated += m.bursts_generated;
        a.delivered += m.bursts_delivered;
        a.lost += m.bursts_lost;
    }

    std::vector<RunAggregate> out;
    out.reserve(groups.size());
    for (Acc& g : groups) {
        std::tie(g.agg.mean_blr, g.agg.stddev_blr) = mean_stddev(g.blrs);
        g.agg.mean_delay_s = mean_stddev(g.delays).first;
        g.agg.mean_deflection_ratio = mean_stddev(g.ratios).first;
        g.agg.mean_offset_s = mean_stddev(g.offsets).first;
        out.push_back(g.agg);
    }
    return out;
}

void write_aggregate_csv_row(std::ostream& os, const RunAggregate& a) {
    os << a.scheme << ',' << a.topology << ',' << format_double(a.load) << ",mean," << format_double(a.mean_blr) << ','
       << format_double(a.mean_delay_s) << ',' << format_double(a.mean_deflection_ratio) << ','
       << format_double(a.mean_offset_s) << ',' << a.deflections << ',' << a.retransmissions << ',' << a.generated
       << ',' << a.delivered << ',' << a.lost << '\n';
}

} // namespace obs
