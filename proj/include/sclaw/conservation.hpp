#pragma once

#include <optional>
#include <vector>

#include "sclaw/flux.hpp"
#include "sclaw/grid.hpp"

namespace sclaw {

// ============================================================================
// Entropy solver for the scalar conservation law  dv/dt + dF(v)/dx = 0.
//
// Godunov's scheme with the exact interval min/max flux, forward Euler in
// time, outflow (copy-cell) boundaries.  The scheme is monotone under the
// CFL condition, so solutions obey the discrete maximum principle and an
// L1 contraction estimate; both are enforced as runtime checks / tests.
// ============================================================================

// Exact entropy solution of the Burgers Riemann problem with states
// (vL, vR) separated at x = 0, evaluated at (t, x).  Shock for vL > vR
// (Rankine-Hugoniot speed (vL+vR)/2), rarefaction fan otherwise.
double riemann_exact_burgers(double vL, double vR, double t, double x);

// Godunov numerical flux for a general C^1 flux model:
//     vL <= vR : min of F over [vL, vR]
//     vL >  vR : max of F over [vR, vL]
// computed by dense sampling plus golden-section refinement around the best
// sample, so non-convex fluxes are handled without a derivative root-finder.
double godunov_flux(double vL, double vR, const FluxModel& flux);

struct EvolveOptions {
    double cfl = 0.5;
    // Record every record_stride-th step; the initial state and the final
    // state are always included.
    int record_stride = 1;
    // Override the adaptive time step (still subject to the CFL check).
    // Used when two runs must share an identical step sequence.
    std::optional<double> fixed_dt;
};

// March v0 to t_end, returning recorded snapshots in time order (first entry
// is v0 at its own time, last entry is at t_end).  The time step is
// cfl * dx / max|F'(v)| recomputed each step; by the maximum principle this
// is constant in practice.  Throws on CFL violation (fixed_dt too large),
// non-finite values, or violation of the discrete maximum principle.
std::vector<ScalarField> evolve_conservation_law(const ScalarField& v0,
                                                 const FluxModel& flux,
                                                 double t_end,
                                                 const EvolveOptions& opt = {});

// ---------------------------------------------------------------------------
// Weak-form diagnostics.
//
// Both residuals integrate against a separable test function
// phi(x) * window(t) whose support must lie strictly inside the space-time
// slab covered by `snaps` (throws otherwise).  Trapezoidal rule in time over
// the recorded snapshots, midpoint rule in space.
// ---------------------------------------------------------------------------

// Entropy production
//     R = integral of [ eta(v) phi(x) w'(t) + q(v) phi'(x) w(t) ] dx dt,
// i.e. the weak form of -(d/dt eta + d/dx q).  For an entropy solution
// R >= -tol: positive values measure dissipation at shocks, smooth regions
// give ~0.  For a Kruzkov-type pair across a Burgers shock the exact
// production rate is s*[eta] - [q] integrated along the shock path.
double entropy_residual(const std::vector<ScalarField>& snaps,
                        const EntropyPair& pair,
                        const TestFunction& phi,
                        const TestFunction& window);

// Same bilinear form with (eta, q) = (id, F); measures how well the solver
// satisfies the conservation law itself in the weak sense (should be ~0 up
// to quadrature error).
double weak_form_residual(const std::vector<ScalarField>& snaps,
                          const FluxModel& flux,
                          const TestFunction& phi,
                          const TestFunction& window);

// Scale for "zero up to quadrature error" checks on the residuals above:
// coeff * (dx + mean recorded dt).
double quadrature_tolerance(const std::vector<ScalarField>& snaps, double coeff);

}  // namespace sclaw
