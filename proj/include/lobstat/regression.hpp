#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "lobstat/errors.hpp"

namespace lobstat {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double r_squared = 0.0;
    std::size_t n = 0;
};

// Ordinary least squares of y on x. Needs n >= 3 so the slope error is
// defined; callers that only want the slope on two points don't exist here.
inline LinearFit ols_fit(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size()) throw InvariantError("ols_fit: mismatched lengths");
    if (n < 3) throw DataError("ols_fit: need at least 3 points");

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw DataError("ols_fit: degenerate x values");

    LinearFit fit;
    fit.n = n;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;

    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        sse += r * r;
    }
    fit.slope_stderr = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
    fit.r_squared = syy == 0.0 ? 1.0 : 1.0 - sse / syy;
    return fit;
}

}  // namespace lobstat
