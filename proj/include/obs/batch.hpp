#pragma once

#include "obs/config.hpp"
#include "obs/metrics.hpp"
#include "obs/simulator.hpp"

#include <span>
#include <vector>

namespace obs {

/// Options used for batch cells: no tracing, no per-burst samples.
RunOptions batch_options();

/// Runs every config, fanning cells across OpenMP threads. Results are in
/// input order and identical to run_batch_serial(). If any cell throws, the
/// first failure (by index) is rethrown with its cell index.
std::vector<SimMetrics> run_batch(std::span<const SimConfig> configs, const RunOptions& opt = batch_options());

/// Reference implementation: one cell after another.
std::vector<SimMetrics> run_batch_serial(std::span<const SimConfig> configs, const RunOptions& opt = batch_options());

/// Per-(scheme, topology, load) summary of a batch: ratios are means of the
/// per-run values, counters are sums. Groups appear in first-seen order.
struct RunAggregate {
    std::string scheme;
    std::string topology;
    double load = 0.0;
    std::size_t runs = 0;
    double mean_blr = 0.0;
    double stddev_blr = 0.0;
    double mean_delay_s = 0.0; // over runs with deliveries
    double mean_deflection_ratio = 0.0;
    double mean_offset_s = 0.0;
    std::uint64_t deflections = 0;
    std::uint64_t retransmissions = 0;
    std::uint64_t generated = 0;
    std::uint64_t delivered = 0;
    std::uint64_t lost = 0;
};

std::vector<RunAggregate> aggregate_runs(std::span<const SimMetrics> runs);

/// Same column layout as the run CSV with seed = "mean".
void write_aggregate_csv_row(std::ostream& os, const RunAggregate& a);

/// Sample mean and standard deviation (n-1; 0 for a single value).
std::pair<double, double> mean_stddev(std::span<const double> xs);

} // namespace obs
