#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "sclaw/rng.hpp"

namespace sclaw {

inline double mean(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("mean: empty sample");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double sample_variance(std::span<const double> xs) {
    if (xs.size() < 2) throw std::invalid_argument("variance: need 2+ samples");
    double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

inline double standard_error(std::span<const double> xs) {
    return std::sqrt(sample_variance(xs) / static_cast<double>(xs.size()));
}

// Median (midpoint of the two central order statistics for even sizes).
inline double median(std::vector<double> xs) {
    if (xs.empty()) throw std::invalid_argument("median: empty sample");
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// Bootstrap standard error of the sample mean: resample with replacement
// n_boot times, return the standard deviation of the resampled means.
// Resampling indices are counter-based so the estimate is reproducible.
inline double bootstrap_se(std::span<const double> xs, int n_boot, std::uint64_t seed) {
    if (xs.size() < 2) throw std::invalid_argument("bootstrap_se: need 2+ samples");
    if (n_boot < 2) throw std::invalid_argument("bootstrap_se: need 2+ replicates");
    const std::uint64_t n = xs.size();
    std::vector<double> means(static_cast<std::size_t>(n_boot));
    std::uint64_t ctr = 0;
    for (int b = 0; b < n_boot; ++b) {
        double s = 0.0;
        for (std::uint64_t j = 0; j < n; ++j)
            s += xs[static_cast<std::size_t>(rng::counter_hash(seed, ctr++) % n)];
        means[static_cast<std::size_t>(b)] = s / static_cast<double>(n);
    }
    double m = 0.0;
    for (double v : means) m += v;
    m /= n_boot;
    double var = 0.0;
    for (double v : means) var += (v - m) * (v - m);
    var /= (n_boot - 1);
    return std::sqrt(var);
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

// Least-squares line through (x_i, y_i).
inline LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("fit_line: need 2+ matched points");
    double mx = mean(xs), my = mean(ys);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

// Slope of log(norm) against log(eps); the exponent p in norm ~ C*eps^p.
inline double fit_loglog_slope(std::span<const double> eps, std::span<const double> norms) {
    std::vector<double> lx(eps.size()), ly(norms.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0) || !(norms[i] > 0.0))
            throw std::invalid_argument("fit_loglog_slope: needs positive data");
        lx[i] = std::log(eps[i]);
        ly[i] = std::log(norms[i]);
    }
    return fit_line(lx, ly).slope;
}

}  // namespace sclaw
