#pragma once

#include <optional>
#include <vector>

#include "sclaw/grid.hpp"

namespace sclaw {

// ============================================================================
// Compactly supported mollifier, primitives (antiderivatives) of densities,
// and the commutator whose L2 decay drives the uniqueness argument.
// ============================================================================

// Standard bump kernel scaled to width epsilon:
//     rho_eps(x) = (1/eps) * C * exp(-1 / (1 - (x/eps)^2))   for |x| < eps,
// with C chosen so the kernel integrates to 1.  Discrete smoothing uses
// cell-averaged weights (per-cell Gauss quadrature of the kernel,
// renormalized to unit sum), so the stencil is faithful even when the
// support is only a cell or two wide.
struct Mollifier {
    double epsilon = 1.0;

    double operator()(double x) const;  // analytic kernel value rho_eps(x)

    // Convolution weights for cell spacing dx: 2*half_width(dx)+1 values,
    // symmetric, summing to 1 (up to the last digit).
    std::vector<double> cell_weights(double dx) const;
    int half_width(double dx) const;
};

Mollifier bump_mollifier(double epsilon);  // throws if epsilon <= 0

// Normalizing constant: integral of exp(-1/(1-s^2)) over (-1,1).  The value
// is pinned here and defended by a quadrature test.
inline constexpr double kBumpIntegral = 0.44399381616807865;
// Second moment of the normalized kernel on (-1,1); the leading commutator
// term for smooth fields is -(this) * eps^2 * v' * u'.
inline constexpr double kBumpSecondMoment = 0.15811363626379665;

// Discrete convolution with edge-value extension beyond the grid (constants
// pass through unchanged; compactly supported fields keep their mass).
// Requires epsilon >= dx.
ScalarField mollify(const ScalarField& field, const Mollifier& moll);

// Antiderivative V(x) = integral of u from x_min, evaluated at cell centers.
// When the integrand u is known it travels along, so downstream consumers
// can use d/dx V = u exactly instead of re-differencing.
struct PrimitiveField {
    Grid1D grid;
    double time = 0.0;
    std::vector<double> values;
    std::optional<ScalarField> integrand;
};

PrimitiveField primitive(const ScalarField& u);

// Cumulative mass at the n+1 cell faces: U[0] = 0, U[i+1] = U[i] + u_i dx.
// Exact (telescoping) for cell-averaged densities.
std::vector<double> face_primitive(const ScalarField& u);

// Evaluate a face-cumulative table at arbitrary y: linear between faces,
// linear extension outside with the edge-cell slope (constant for compactly
// supported data).
double eval_face_primitive(const Grid1D& g, const std::vector<double>& face_cum,
                           double y);

// DiPerna-Lions commutator
//     R_eps(V, v) = v_eps * d/dx(V_eps) - (v * d/dx V)_eps
// evaluated with d/dx V taken from the stored integrand when available
// (mollification and differentiation commute, so d/dx(V_eps) = (dV/dx)_eps);
// otherwise by centered differences of V.
ScalarField commutator(const PrimitiveField& V, const ScalarField& v,
                       const Mollifier& moll);

struct DecayPoint {
    double epsilon = 0.0;
    double l2_norm = 0.0;
};

struct DecayTable {
    std::vector<DecayPoint> points;
    std::optional<double> slope;  // log-log fit; absent when exact or single rung
    bool exact = false;           // all norms at floating-point zero
};

// Space-time L2 norm of the commutator for each epsilon in the ladder:
// ||R||^2 = trapezoid over snapshot times of ||R(t)||_L2(x)^2.  The v and u
// series must be time-aligned on a common grid.  When every rung vanishes
// (e.g. constant drift) the table is flagged exact and no slope is fitted.
DecayTable commutator_l2_decay(const std::vector<ScalarField>& v_snaps,
                               const std::vector<ScalarField>& u_snaps,
                               const std::vector<double>& epsilons);

}  // namespace sclaw
