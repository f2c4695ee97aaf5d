#pragma once

#include <cstdint>
#include <vector>

namespace sclaw {

// ============================================================================
// Brownian increments on a uniform time grid, generated counter-based so a
// path is a pure function of (seed, dt, n_steps): reproducible across runs,
// platforms, and evaluation order.
// ============================================================================

struct BrownianPath {
    std::uint64_t seed = 0;
    double dt = 0.0;
    int n_steps = 0;
    std::vector<double> increments;  // increments[k] = B(t_{k+1}) - B(t_k) ~ N(0, dt)
    std::vector<double> cumulative;  // cumulative[k] = B(t_k); size n_steps + 1, starts at 0

    double t_end() const { return dt * n_steps; }
};

// Increment k is sqrt(dt) * normal keyed by (seed, k).
BrownianPath sample_brownian(std::uint64_t seed, double dt, int n_steps);

// The deterministic reference path B = 0 on the same grid (used for the
// noise-off comparison runs).
BrownianPath zero_path(double dt, int n_steps);

// Seed for path p of an ensemble: a hash of (base_seed, p), so ensembles with
// different base seeds are decorrelated and individual paths can be re-drawn
// in isolation.
std::uint64_t derive_path_seed(std::uint64_t base_seed, std::uint64_t path_index);

}  // namespace sclaw
