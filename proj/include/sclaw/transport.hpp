#pragma once

#include <cstdint>
#include <vector>

#include "sclaw/flow.hpp"
#include "sclaw/flux.hpp"
#include "sclaw/grid.hpp"
#include "sclaw/mollify.hpp"

namespace sclaw {

// ============================================================================
// Density transport along the stochastic flow: pushforward of the initial
// density, an independent finite-volume cross-check, and ensemble statistics.
// ============================================================================

struct PushforwardField {
    ScalarField u;
    int clamped_cells = 0;    // cells whose evaluation used a clamped preimage
    double clamped_mass = 0;  // |u| dx over those cells
};

// Pointwise pushforward on the cells of u0_eps:
//     u(t, x_i) = u0_eps(psi(t, x_i)) * J_psi(t, x_i),
// with J_psi = 1/J_phi at the preimage.  `inv` must carry the cell centers of
// u0_eps.grid as targets.  Throws if the |u|-mass sitting on clamped cells
// exceeds mass_tol * total |u|-mass: that much density escaped the region
// covered by the flow's start points.
PushforwardField pushforward_density(const ScalarField& u0_eps,
                                     const InverseFlow& inv, double t,
                                     double mass_tol);

// Convenience overload building the inverse at the cell centers internally.
PushforwardField pushforward_density(const ScalarField& u0_eps,
                                     const FlowRealization& flow, double t,
                                     double mass_tol);

// Conservative variant used by the ensemble pipeline: cell averages from
// differences of the initial cumulative mass at face preimages,
//     u_i = [ U0(psi(t, face_{i+1})) - U0(psi(t, face_i)) ] / dx.
// Total mass telescopes exactly as long as the start points bracket the
// support of u0_eps, clamped or not.  `inv_faces` must carry the n+1 faces
// of u0_eps.grid as targets; `u0_face_cum` comes from face_primitive(u0_eps).
PushforwardField pushforward_density_cellavg(const ScalarField& u0_eps,
                                             const std::vector<double>& u0_face_cum,
                                             const InverseFlow& inv_faces,
                                             double t, double mass_tol);

struct ContinuityOptions {
    // Add the explicit 1/2 d^2u/dx^2 dt Ito-correction term each step.  The
    // default split scheme (upwind advection + exact shift by dB) already
    // realizes the Stratonovich dynamics, so this stays off for the
    // cross-validation runs; enabling it requires dt <= dx^2.
    bool enable_diffusion = false;
    // Extra step indices to record; step 0 and the final step are always
    // recorded.  Pass all steps for the weak-residual diagnostic.
    std::vector<int> record_steps;
};

// Finite-volume solve of  du/dt + d/dx((v + dB/dt) u) = 0  on the grid of
// u0.  Each Brownian step splits into upwind advection with face velocities
// (v_i + v_{i+1})/2 followed by an exact conservative translation by dB_k.
// Drift is sampled from the same DriftSampler the flow uses.  Throws if the
// advective CFL number max|v| dt / dx exceeds 1.
std::vector<ScalarField> evolve_continuity_fv(const ScalarField& u0,
                                              const DriftSampler& drift,
                                              const BrownianPath& path,
                                              const ContinuityOptions& opt = {});

// Pathwise weak-form residual of the Ito formulation over [0, t_end]:
//     R = [int u phi]_0^T - sum_k (int u_k v phi') dt
//         - sum_k (int u_k phi') dB_k - 1/2 sum_k (int u_k phi'') dt,
// with left-endpoint sampling.  u_per_step must hold one snapshot per path
// step (n_steps + 1 entries).  For the split scheme the residual carries the
// usual pathwise O(sqrt(dt)) quadratic-variation error.
double spde_weak_residual(const std::vector<ScalarField>& u_per_step,
                          const DriftSampler& drift,
                          const BrownianPath& path,
                          const TestFunction& phi);

// One mollification rung of a Monte Carlo ensemble: per-path density
// snapshots at shared record times.
struct DensityEnsemble {
    double epsilon = 0.0;
    std::vector<double> record_times;
    std::vector<std::uint64_t> path_seeds;
    // paths[p][r] = density of path p at record_times[r].
    std::vector<std::vector<ScalarField>> paths;
};

struct MomentEstimate {
    double value = 0.0;
    double se = 0.0;
};

// Monte Carlo estimate of  integral E[u(t,x)^2] dx  at a record time:
// mean over paths of the per-path integral, with a bootstrap standard error
// (resampling paths, seeded for reproducibility).
MomentEstimate ensemble_second_moment(const DensityEnsemble& ens, double t,
                                      std::uint64_t bootstrap_seed,
                                      int n_boot = 200);

// Cell-wise ensemble statistics at a record time: mean of u, mean of u^2,
// and the plain standard error of the cell mean.
struct CellStats {
    ScalarField mean_u;
    ScalarField mean_u_sq;
    ScalarField se;
};

CellStats ensemble_cell_stats(const DensityEnsemble& ens, double t);

}  // namespace sclaw
