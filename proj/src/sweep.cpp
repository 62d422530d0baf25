#include "obs/sweep.hpp"

#include "obs/batch.hpp"

#include <stdexcept>
#include <string>

namespace obs {

namespace {

std::vector<double> blrs_of(std::span<const SimMetrics> runs) {
    std::vector<double> out;
    out.reserve(runs.size());
    for (const SimMetrics& m : runs) out.push_back(blr(m));
    return out;
}

} // namespace

ThresholdSweepResult threshold_sweep(const SimConfig& base, double load, std::span<const double> thresholds,
                                     std::span<const std::uint64_t> seeds) {
    if (thresholds.empty()) throw std::invalid_argument("threshold_sweep: empty grid");
    if (seeds.empty()) throw std::invalid_argument("threshold_sweep: no seeds");

    std::vector<SimConfig> cells;
    for (double th : thresholds) {
        for (std::uint64_t seed : seeds) {
            SimConfig c = base;
            c.policy.scheme = Scheme::Ahdr;
            c.load = load;
            c.pinned_threshold = th;
            c.seed = seed;
            c.validate();
            cells.push_back(std::move(c));
        }
    }

    ThresholdSweepResult result;
    result.raw = run_batch(cells);
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        auto slice = std::span<const SimMetrics>(result.raw).subspan(i * seeds.size(), seeds.size());
        auto blrs = blrs_of(slice);
        auto [mean, sd] = mean_stddev(blrs);
        result.rows.push_back(ThresholdSweepRow{thresholds[i], mean, sd, seeds.size()});
    }
    result.best_threshold = argmin_threshold(result.rows);
    return result;
}

double argmin_threshold(std::span<const ThresholdSweepRow> rows) {
    if (rows.empty()) throw std::invalid_argument("argmin_threshold: empty table");
    const ThresholdSweepRow* best = &rows.front();
    for (const ThresholdSweepRow& r : rows) {
        if (r.mean_blr < best->mean_blr || (r.mean_blr == best->mean_blr && r.threshold < best->threshold)) best = &r;
    }
    return best->threshold;
}

WeightSweepResult weight_sweep(const SimConfig& base, std::span<const ThresholdWeights> grid,
                               std::span<const std::uint64_t> seeds) {
    if (grid.empty()) throw std::invalid_argument("weight_sweep: empty grid");
    if (seeds.empty()) throw std::invalid_argument("weight_sweep: no seeds");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        try {
            grid[i].validate();
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("weight grid point " + std::to_string(i) + " (" + std::to_string(grid[i].beta_blr) +
                                        ", " + std::to_string(grid[i].beta_u) + "): " + e.what());
        }
    }

    std::vector<SimConfig> cells;
    for (const ThresholdWeights& w : grid) {
        for (std::uint64_t seed : seeds) {
            SimConfig c = base;
            c.policy.scheme = Scheme::Ahdr;
            c.threshold_weights = w;
            c.pinned_threshold.reset();
            c.seed = seed;
            c.validate();
            cells.push_back(std::move(c));
        }
    }

    WeightSweepResult result;
    result.raw = run_batch(cells);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto slice = std::span<const SimMetrics>(result.raw).subspan(i * seeds.size(), seeds.size());
        auto blrs = blrs_of(slice);
        auto [mean, sd] = mean_stddev(blrs);
        result.rows.push_back(WeightSweepRow{grid[i].beta_blr, grid[i].beta_u, mean, sd, seeds.size()});
    }
    return result;
}

void write_threshold_sweep_csv(std::ostream& os, const ThresholdSweepResult& r) {
    os << "threshold,mean_blr,stddev_blr,runs\n";
    for (const auto& row : r.rows) {
        os << format_double(row.threshold) << ',' << format_double(row.mean_blr) << ','
           << format_double(row.stddev_blr) << ',' << row.runs << '\n';
    }
}

void write_weight_sweep_csv(std::ostream& os, const WeightSweepResult& r) {
    os << "beta_blr,beta_u,mean_blr,stddev_blr,runs\n";
    for (const auto& row : r.rows) {
        os << format_double(row.beta_blr) << ',' << format_double(row.beta_u) << ',' << format_double(row.mean_blr)
           << ',' << format_double(row.stddev_blr) << ',' << row.runs << '\n';
    }
}

} // namespace obs
