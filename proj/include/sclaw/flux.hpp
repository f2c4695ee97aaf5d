#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sclaw {

// ============================================================================
// Flux models, entropy pairs and compactly supported test functions.
// ============================================================================

// A scalar flux F with its derivative.  F' drives both the CFL condition and
// the entropy-flux quadrature, so it is part of the model rather than being
// re-derived numerically.
struct FluxModel {
    std::string label;
    std::function<double(double)> F;
    std::function<double(double)> F_prime;
};

FluxModel burgers_flux();                     // F(v) = v^2 / 2
FluxModel advection_flux(double speed);       // F(v) = speed * v
FluxModel flux_by_label(const std::string& label);  // throws on unknown label

// Convex entropy eta with compatible flux q (q' = eta' F').  `anchor` and
// `delta` record the Kruzkov parameters for pairs built by smoothed_kruzkov;
// hand-built pairs may leave them at zero.
struct EntropyPair {
    std::string label;
    double anchor = 0.0;
    double delta = 0.0;
    std::function<double(double)> eta;
    std::function<double(double)> q;
};

// Smoothed Kruzkov pair eta(v) = sqrt((v-k)^2 + delta^2) with q obtained by
// quadrature of eta' F' from the anchor k, tabulated over [lo, hi] (extended
// to include k) and evaluated by cubic Hermite interpolation with the
// analytic slopes q' = eta' F'.  The constructor validates convexity and the
// compatibility relation on [lo, hi] and throws std::runtime_error if either
// fails.
EntropyPair smoothed_kruzkov(double k, double delta, const FluxModel& flux,
                             double lo, double hi);

// Validation helpers (also used by the constructors above).
//
// flux_derivative_defect: max over n subintervals of
//     |F(b)-F(a) - integral of F'| / (b-a).
// entropy_compat_defect: same for q against eta' F', with eta' taken by
//     central differences.
// min_eta_curvature: smallest finite-difference second derivative of eta.
double flux_derivative_defect(const FluxModel& flux, double lo, double hi, int n);
double entropy_compat_defect(const EntropyPair& pair, const FluxModel& flux,
                             double lo, double hi, int n);
double min_eta_curvature(const std::function<double(double)>& eta,
                         double lo, double hi, int n);

// Smooth bump supported on [center-width, center+width]:
//     phi(x) = exp(1 - 1/(1-s^2)),  s = (x-center)/width,
// with analytic first and second derivatives.  Used both as a spatial test
// function and as a temporal window.
struct TestFunction {
    double center = 0.0;
    double width = 1.0;

    double operator()(double x) const;
    double d1(double x) const;
    double d2(double x) const;

    double support_lo() const { return center - width; }
    double support_hi() const { return center + width; }
};

TestFunction smooth_bump(double center, double width);  // throws if width <= 0

// Max relative defect of d1/d2 against Richardson central differences on a
// sample of interior points; cheap self-check used by the test-suite.
double test_function_defect(const TestFunction& tf, int n);

}  // namespace sclaw
