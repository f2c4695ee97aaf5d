#include "sclaw/brownian.hpp"

#include <cmath>
#include <stdexcept>

#include "sclaw/rng.hpp"

namespace sclaw {

namespace {

void check_grid(double dt, int n_steps) {
    if (!(dt > 0.0)) throw std::invalid_argument("brownian: dt must be positive");
    if (n_steps < 1) throw std::invalid_argument("brownian: need at least one step");
}

}  // namespace

BrownianPath sample_brownian(std::uint64_t seed, double dt, int n_steps) {
    check_grid(dt, n_steps);
    BrownianPath p;
    p.seed = seed;
    p.dt = dt;
    p.n_steps = n_steps;
    p.increments.resize(static_cast<std::size_t>(n_steps));
    p.cumulative.resize(static_cast<std::size_t>(n_steps) + 1);
    p.cumulative[0] = 0.0;
    const double root_dt = std::sqrt(dt);
    for (int k = 0; k < n_steps; ++k) {
        double dB = root_dt * rng::normal(seed, static_cast<std::uint64_t>(k));
        p.increments[static_cast<std::size_t>(k)] = dB;
        p.cumulative[static_cast<std::size_t>(k) + 1] =
            p.cumulative[static_cast<std::size_t>(k)] + dB;
    }
    return p;
}

BrownianPath zero_path(double dt, int n_steps) {
    check_grid(dt, n_steps);
    BrownianPath p;
    p.seed = 0;
    p.dt = dt;
    p.n_steps = n_steps;
    p.increments.assign(static_cast<std::size_t>(n_steps), 0.0);
    p.cumulative.assign(static_cast<std::size_t>(n_steps) + 1, 0.0);
    return p;
}

std::uint64_t derive_path_seed(std::uint64_t base_seed, std::uint64_t path_index) {
    // Offset keeps path seeds out of the stream of variates drawn directly
    // from base_seed (bootstrap resampling, etc.).
    return rng::counter_hash(base_seed ^ 0x5bf0a8b1457395feull, path_index);
}

}  // namespace sclaw
