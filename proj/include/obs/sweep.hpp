#pragma once

#include "obs/config.hpp"
#include "obs/metrics.hpp"

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

namespace obs {

struct ThresholdSweepRow {
    double threshold = 0.0;
    double mean_blr = 0.0;
    double stddev_blr = 0.0;
    std::size_t runs = 0;
};

struct ThresholdSweepResult {
    std::vector<ThresholdSweepRow> rows; // grid order
    std::vector<SimMetrics> raw;         // grid-major, then seed
    double best_threshold = 0.0;
};

/// Runs AHDR at `load` with the decision threshold pinned to each grid value,
/// averaging BLR over `seeds`.
ThresholdSweepResult threshold_sweep(const SimConfig& base, double load, std::span<const double> thresholds,
                                     std::span<const std::uint64_t> seeds);

/// Lowest mean BLR; ties go to the smaller threshold, so the answer does not
/// depend on row order. Throws on an empty table.
double argmin_threshold(std::span<const ThresholdSweepRow> rows);

struct WeightSweepRow {
    double beta_blr = 0.0;
    double beta_u = 0.0;
    double mean_blr = 0.0;
    double stddev_blr = 0.0;
    std::size_t runs = 0;
};

struct WeightSweepResult {
    std::vector<WeightSweepRow> rows;
    std::vector<SimMetrics> raw; // grid-major, then seed
};

/// Full-factorial AHDR runs over (threshold weights) x seeds. Every grid point is
/// validated before anything runs.
WeightSweepResult weight_sweep(const SimConfig& base, std::span<const ThresholdWeights> grid,
                               std::span<const std::uint64_t> seeds);

void write_threshold_sweep_csv(std::ostream& os, const ThresholdSweepResult& r);
void write_weight_sweep_csv(std::ostream& os, const WeightSweepResult& r);

} // namespace obs
