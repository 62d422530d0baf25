#pragma once

#include "obs/protocol.hpp"

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace obs {

/// Post-warmup outcome counters of one run. Only bursts first generated after
/// the warmup are tracked; each is counted once however many times it was
/// retransmitted.
struct SimMetrics {
    std::string scheme;
    std::string topology;
    double load = 0.0;
    std::uint64_t seed = 0;

    std::uint64_t bursts_generated = 0;
    std::uint64_t bursts_delivered = 0;
    std::uint64_t bursts_lost = 0;
    std::uint64_t deflections = 0;
    std::uint64_t retransmissions = 0;

    // Diagnostics, same population.
    std::uint64_t contentions = 0;
    std::uint64_t offset_failures = 0;
    std::uint64_t acks = 0;
    std::uint64_t nacks = 0;

    // Samples are optional (memory); the sums are always maintained.
    std::vector<std::pair<BurstId, double>> delay_samples; // seconds
    std::vector<double> offset_samples;                    // seconds, one per transmission attempt
    double delay_sum = 0.0;
    std::uint64_t delay_count = 0;
    double offset_sum = 0.0;
    std::uint64_t offset_count = 0;

    std::uint64_t in_flight() const { return bursts_generated - bursts_delivered - bursts_lost; }
};

/// lost / generated. Throws std::domain_error when nothing was generated.
double blr(const SimMetrics& m);

/// deflections / (deflections + retransmissions), 0 when both are 0.
double deflection_ratio(const SimMetrics& m);

/// Mean first-generation-to-delivery time of delivered bursts, seconds.
/// Throws std::domain_error without deliveries.
double mean_end_to_end_delay(const SimMetrics& m);

/// Mean ingress offset over transmission attempts, seconds; 0 when none.
double mean_offset(const SimMetrics& m);

/// CSV with the run schema. Floats use 12 significant digits; undefined
/// ratios print as "nan".
void write_runs_csv_header(std::ostream& os);
void write_runs_csv_row(std::ostream& os, const SimMetrics& m);

std::string format_double(double v);

} // namespace obs
