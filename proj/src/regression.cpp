#include "obs/regression.hpp"

#include <algorithm>
#include <stdexcept>

namespace obs {

RegressionFit linear_fit(std::span<const std::pair<double, double>> points) {
    if (points.size() < 2) throw std::invalid_argument("linear_fit: need at least two points");
    const double n = static_cast<double>(points.size());

    double mean_x = 0.0;
    double mean_y = 0.0;
    for (auto [x, y] : points) {
        mean_x += x;
        mean_y += y;
    }
    mean_x /= n;
    mean_y /= n;

    // Centred sums; better conditioned than the raw normal equations.
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (auto [x, y] : points) {
        const double dx = x - mean_x;
        const double dy = y - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0) throw std::invalid_argument("linear_fit: x values are all equal");

    RegressionFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = mean_y - fit.slope * mean_x;
    fit.r_squared = syy == 0.0 ? 1.0 : std::clamp((sxy * sxy) / (sxx * syy), 0.0, 1.0);
    return fit;
}

} // namespace obs
