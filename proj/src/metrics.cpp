#include "obs/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace obs {

double blr(const SimMetrics& m) {
    if (m.bursts_generated == 0) throw std::domain_error("blr: no bursts generated");
    return static_cast<double>(m.bursts_lost) / static_cast<double>(m.bursts_generated);
}

double deflection_ratio(const SimMetrics& m) {
    const std::uint64_t total = m.deflections + m.retransmissions;
    if (total == 0) return 0.0;
    return static_cast<double>(m.deflections) / static_cast<double>(total);
}

double mean_end_to_end_delay(const SimMetrics& m) {
    if (m.delay_count == 0) throw std::domain_error("mean_end_to_end_delay: no delivered bursts");
    return m.delay_sum / static_cast<double>(m.delay_count);
}

double mean_offset(const SimMetrics& m) {
    if (m.offset_count == 0) return 0.0;
    return m.offset_sum / static_cast<double>(m.offset_count);
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_runs_csv_header(std::ostream& os) {
    os << "scheme,topology,load,seed,blr,mean_delay_s,deflection_ratio,mean_offset_s,deflections,retransmissions,"
          "generated,delivered,lost\n";
}

void write_runs_csv_row(std::ostream& os, const SimMetrics& m) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    const double b = m.bursts_generated ? blr(m) : nan;
    const double d = m.delay_count ? mean_end_to_end_delay(m) : nan;
    os << m.scheme << ',' << m.topology << ',' << format_double(m.load) << ',' << m.seed << ',' << format_double(b)
       << ',' << format_double(d) << ',' << format_double(deflection_ratio(m)) << ','
       << format_double(mean_offset(m)) << ',' << m.deflections << ',' << m.retransmissions << ','
       << m.bursts_generated << ',' << m.bursts_delivered << ',' << m.bursts_lost << '\n';
}

} // namespace obs
