#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

// ============================================================================
// Test-side oracles.
//
// Everything in this header is implemented independently of the library so
// that agreement between the two is evidence, not tautology: closed-form
// solutions, reference quadrature, and exact shock bookkeeping.
// ============================================================================

namespace oracle {

// Exact entropy solution of the Burgers Riemann problem with jump at x = 0.
//   vl > vr : shock travelling at the Rankine-Hugoniot speed (vl + vr) / 2
//   vl < vr : rarefaction fan  v = x/t  between the characteristic speeds
inline double burgers_riemann(double vl, double vr, double t, double x) {
    if (t <= 0.0) return x < 0.0 ? vl : vr;
    if (vl > vr) {
        double s = 0.5 * (vl + vr);
        return x < s * t ? vl : vr;
    }
    double xi = x / t;
    if (xi <= vl) return vl;
    if (xi >= vr) return vr;
    return xi;
}

// Cell average of the exact Riemann solution over [a, b]: the solution is
// piecewise linear in x for fixed t, so a 64-panel midpoint sum is cheap and
// accurate to the panel containing a kink.
inline double burgers_riemann_cell_avg(double vl, double vr, double t,
                                       double a, double b) {
    const int n = 64;
    double h = (b - a) / n, s = 0.0;
    for (int i = 0; i < n; ++i) s += burgers_riemann(vl, vr, t, a + (i + 0.5) * h);
    return s / n;
}

// Composite Simpson with n panels (n rounded up to even).
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int n) {
    if (n % 2 == 1) ++n;
    double h = (b - a) / n, s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// Closed-form entropy flux of the smoothed Kruzkov pair for the Burgers flux:
//   q(v) = int_k^v  (s-k)/sqrt((s-k)^2 + d^2) * s  ds
// With w = v - k the antiderivative is elementary:
//   q = (w/2) sqrt(w^2+d^2) - (d^2/2) asinh(w/d) + k (sqrt(w^2+d^2) - d).
inline double kruzkov_q_burgers(double k, double delta, double v) {
    double w = v - k;
    double r = std::sqrt(w * w + delta * delta);
    return 0.5 * w * r - 0.5 * delta * delta * std::asinh(w / delta) +
           k * (r - delta);
}

// Same for the linear flux F(v) = c v:  q(v) = c (eta(v) - eta(k)).
inline double kruzkov_q_advection(double k, double delta, double c, double v) {
    double w = v - k;
    return c * (std::sqrt(w * w + delta * delta) - delta);
}

// Entropy production rate of the sharp Kruzkov pair (delta -> 0) across a
// Burgers shock (vl, vr), vl > k > vr: the Rankine-Hugoniot defect
//   D(k) = [q] - s [eta]  with  [a] = a(vl) - a(vr),
// which evaluates to (vl - k)(k - vr).  For (1, 0) this is k (1 - k), with
// maximum 1/4 at k = 1/2.
inline double shock_entropy_production(double vl, double vr, double k) {
    if (!(vl > k && k > vr)) return 0.0;
    return (vl - k) * (k - vr);
}

// Conservative shift of a piecewise-constant cell profile by b (independent
// overlap bookkeeping: each shifted cell redistributes into the two grid
// cells it straddles).  Matches what an exact Lagrangian translation does to
// cell averages.
inline std::vector<double> shift_cell_profile(const std::vector<double>& u,
                                              double dx, double b) {
    const int n = static_cast<int>(u.size());
    std::vector<double> out(u.size(), 0.0);
    double cells = b / dx;
    double fl = std::floor(cells);
    int m = static_cast<int>(fl);
    double f = cells - fl;  // in [0, 1)
    for (int i = 0; i < n; ++i) {
        int lo = i + m, hi = i + m + 1;  // shifted cell spans parts of lo, hi
        if (lo >= 0 && lo < n) out[static_cast<std::size_t>(lo)] += (1.0 - f) * u[static_cast<std::size_t>(i)];
        if (hi >= 0 && hi < n) out[static_cast<std::size_t>(hi)] += f * u[static_cast<std::size_t>(i)];
    }
    return out;
}

// Total variation of a cell profile.
inline double total_variation(const std::vector<double>& u) {
    double tv = 0.0;
    for (std::size_t i = 1; i < u.size(); ++i) tv += std::abs(u[i] - u[i - 1]);
    return tv;
}

}  // namespace oracle
