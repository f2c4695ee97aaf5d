#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "sclaw/brownian.hpp"
#include "sclaw/grid.hpp"

namespace sclaw {

// ============================================================================
// Stochastic characteristics  dX = v_eps(t, X) dt + dB  and their inverse.
//
// The drift is a time-indexed family of smoothed solver snapshots, sampled
// piecewise-constant in t and linear in x.  Flows are integrated with
// Euler-Maruyama on the Brownian path's uniform grid; the flow Jacobian is
// carried along as the exponential of the time-integrated drift slope,
//     J(t, x0) = exp( integral_0^t  d/dx v_eps(s, X_s) ds ),
// accumulated with left-endpoint sums on the same grid.
// ============================================================================

class DriftSampler {
  public:
    // Snapshots must share one grid and have strictly increasing times.
    explicit DriftSampler(std::vector<ScalarField> snapshots);

    // Piecewise-constant in t (last snapshot at or before t), linear in x
    // between cell centers, constant beyond the outermost centers.
    double value(double t, double x) const;

    // Exact spatial derivative of the interpolant above: face differences
    // (v_{i+1} - v_i)/dx between neighbouring centers, zero outside.  Using
    // the interpolant's own derivative keeps the carried Jacobian consistent
    // with d(phi)/d(x0) of the discrete flow.
    double slope(double t, double x) const;

    double max_abs_value() const { return max_abs_value_; }
    const Grid1D& grid() const { return snaps_.front().grid; }
    const std::vector<ScalarField>& snapshots() const { return snaps_; }

  private:
    int index_at(double t) const;

    std::vector<ScalarField> snaps_;
    double max_abs_value_ = 0.0;
};

struct FlowOptions {
    // Times at which the flow state is recorded; each must sit on the
    // Brownian step grid (k * dt up to rounding).  Always non-empty.
    std::vector<double> record_times;
    // Trajectories leaving [exit_lo, exit_hi] abort the solve: the caller
    // sizes this box so that clamped drift extension is never silently used
    // in earnest.
    double exit_lo = -std::numeric_limits<double>::infinity();
    double exit_hi = std::numeric_limits<double>::infinity();
};

struct FlowRealization {
    std::vector<double> start_points;
    std::vector<double> times;
    // Row t, column j: state of the trajectory started at start_points[j].
    std::vector<std::vector<double>> forward;
    std::vector<std::vector<double>> jacobian;

    int time_index(double t) const;  // throws if t is not a recorded time
};

// Integrate all start points through one Brownian realization.  Start points
// must be strictly increasing; the flow is checked to remain monotone
// (non-decreasing, exact comparisons) at every recorded time and throws on an
// inversion or on domain exit.  Exact ties are allowed: strongly compressive
// drift can contract neighbouring trajectories below double resolution.
FlowRealization solve_flow_sde(const DriftSampler& drift,
                               const BrownianPath& path,
                               std::vector<double> start_points,
                               const FlowOptions& opt);

// Inverse flow psi(t, y) on a fixed set of target points, built by inverting
// the forward graph {(phi(t, x0), x0)} with monotone linear interpolation.
// Targets outside the image are clamped to the nearest start point and
// flagged.  inv_jacobian = 1 / J_phi evaluated at psi (the Jacobian of the
// inverse map).
struct InverseFlow {
    std::vector<double> targets;
    std::vector<double> times;
    std::vector<std::vector<double>> psi;
    std::vector<std::vector<double>> inv_jacobian;
    std::vector<std::vector<std::uint8_t>> clamped;

    int time_index(double t) const;
};

InverseFlow invert_flow(const FlowRealization& flow, std::vector<double> targets);

// Jacobian rows exp(integral of slope) for the given starts/times; identical
// to FlowRealization::jacobian and exposed for direct comparison against
// finite differences of the flow map.
std::vector<std::vector<double>> jacobian_exponential(const DriftSampler& drift,
                                                      const BrownianPath& path,
                                                      const std::vector<double>& starts,
                                                      const std::vector<double>& record_times);

// Monte Carlo mean of the stochastic exponential
//     E(t) = exp( sum_k v(t_k, X_k) dB_k - 1/2 sum_k v(t_k, X_k)^2 dt )
// over n_paths independent Brownian paths, one trajectory per path started
// at x0.  With left-endpoint sampling this is an exact discrete martingale:
// E[E(t)] = 1 for every t, which the returned means certify within their
// standard errors.
struct MartingaleSample {
    double t = 0.0;
    double mean = 0.0;
    double se = 0.0;
};

std::vector<MartingaleSample> stochastic_exponential_mean(
    const DriftSampler& drift, std::uint64_t base_seed, int n_paths, double x0,
    double dt, const std::vector<double>& eval_times);

}  // namespace sclaw
