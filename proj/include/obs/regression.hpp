#pragma once

#include <span>
#include <utility>

namespace obs {

struct RegressionFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0; // squared Pearson correlation, in [0,1]
};

/// Ordinary least squares y = slope * x + intercept.
///
/// Needs at least two points and some spread in x (std::invalid_argument
/// otherwise). If every y is equal the fit is exact and r_squared is 1.
RegressionFit linear_fit(std::span<const std::pair<double, double>> points);

} // namespace obs
