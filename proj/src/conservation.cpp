#include "sclaw/conservation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sclaw {

double riemann_exact_burgers(double vL, double vR, double t, double x) {
    if (t <= 0.0) return x < 0.0 ? vL : vR;
    if (vL > vR) {
        // Shock with Rankine-Hugoniot speed (vL + vR) / 2.
        double s = 0.5 * (vL + vR);
        return x < s * t ? vL : vR;
    }
    // Rarefaction fan between the characteristic speeds vL and vR.
    if (x <= vL * t) return vL;
    if (x >= vR * t) return vR;
    return x / t;
}

namespace {

// Golden-section minimization of fn over [a, b]; returns the smallest value
// seen (endpoints included).  fn is assumed unimodal on [a, b] -- callers
// bracket the best dense sample first, so a local dip cannot be skipped.
double golden_min(const std::function<double(double)>& fn, double a, double b) {
    constexpr double invphi = 0.6180339887498948482;
    double best = std::min(fn(a), fn(b));
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = fn(x1), f2 = fn(x2);
    const double tol = 1e-13 * (1.0 + std::abs(a) + std::abs(b));
    for (int it = 0; it < 200 && (b - a) > tol; ++it) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = fn(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = fn(x2);
        }
    }
    return std::min(best, std::min(f1, f2));
}

}  // namespace

double godunov_flux(double vL, double vR, const FluxModel& flux) {
    if (vL == vR) return flux.F(vL);

    const bool minimize = vL < vR;
    const double lo = std::min(vL, vR);
    const double hi = std::max(vL, vR);

    // Sign-flip so we always minimize.
    auto fn = [&](double v) { return minimize ? flux.F(v) : -flux.F(v); };

    // Dense sampling to locate the global basin, then golden-section
    // refinement between the neighbours of the best sample.
    constexpr int n_samples = 64;
    int best_i = 0;
    double best = fn(lo);
    for (int i = 1; i <= n_samples; ++i) {
        double v = lo + (hi - lo) * i / n_samples;
        double f = fn(v);
        if (f < best) {
            best = f;
            best_i = i;
        }
    }
    double a = lo + (hi - lo) * std::max(0, best_i - 1) / n_samples;
    double b = lo + (hi - lo) * std::min(n_samples, best_i + 1) / n_samples;
    double refined = std::min(best, golden_min(fn, a, b));
    return minimize ? refined : -refined;
}

std::vector<ScalarField> evolve_conservation_law(const ScalarField& v0,
                                                 const FluxModel& flux,
                                                 double t_end,
                                                 const EvolveOptions& opt) {
    const Grid1D& g = v0.grid;
    const int n = g.n_cells;
    const double dx = g.dx();
    if (n < 2) throw std::invalid_argument("evolve: need at least 2 cells");
    if (!(opt.cfl > 0.0 && opt.cfl <= 1.0))
        throw std::invalid_argument("evolve: cfl must lie in (0, 1]");
    if (opt.record_stride < 1)
        throw std::invalid_argument("evolve: record_stride must be >= 1");
    if (!(t_end >= v0.time))
        throw std::invalid_argument("evolve: t_end is before the initial time");
    require_finite(v0, "evolve: initial data");

    // Bounds for the discrete maximum principle (fixed by the initial data).
    double v_min = v0.values[0], v_max = v0.values[0];
    for (double v : v0.values) {
        v_min = std::min(v_min, v);
        v_max = std::max(v_max, v);
    }

    std::vector<ScalarField> out;
    out.push_back(v0);

    std::vector<double> v = v0.values;
    std::vector<double> fluxes(static_cast<std::size_t>(n) + 1);
    double t = v0.time;
    long step = 0;

    while (t < t_end - 1e-14 * (1.0 + std::abs(t_end))) {
        double max_speed = 0.0;
        for (double vi : v)
            max_speed = std::max(max_speed, std::abs(flux.F_prime(vi)));

        double dt = opt.fixed_dt ? *opt.fixed_dt
                                 : (max_speed > 0.0 ? opt.cfl * dx / max_speed
                                                    : t_end - t);
        if (!(dt > 0.0)) throw std::runtime_error("evolve: non-positive time step");
        bool final_step = false;
        if (dt >= t_end - t) {
            dt = t_end - t;
            final_step = true;
        }
        // Monotonicity of the scheme requires max|F'| dt <= dx.
        if (max_speed * dt > dx * (1.0 + 1e-12))
            throw std::runtime_error("evolve: CFL violation at t=" + std::to_string(t) +
                                     " (speed " + std::to_string(max_speed) +
                                     ", dt " + std::to_string(dt) + ")");

        // Interior faces carry the exact Riemann flux; outflow boundaries use
        // copy-cell ghosts, which reduces to F(edge value).
        fluxes[0] = flux.F(v[0]);
        fluxes[static_cast<std::size_t>(n)] = flux.F(v[static_cast<std::size_t>(n) - 1]);
        for (int i = 1; i < n; ++i)
            fluxes[static_cast<std::size_t>(i)] =
                godunov_flux(v[static_cast<std::size_t>(i) - 1], v[static_cast<std::size_t>(i)], flux);

        const double lambda = dt / dx;
        for (int i = 0; i < n; ++i) {
            double vn = v[static_cast<std::size_t>(i)] -
                        lambda * (fluxes[static_cast<std::size_t>(i) + 1] -
                                  fluxes[static_cast<std::size_t>(i)]);
            if (!std::isfinite(vn))
                throw std::runtime_error("evolve: blow-up in cell " + std::to_string(i) +
                                         " at t=" + std::to_string(t + dt) + " (step " +
                                         std::to_string(step + 1) + ")");
            if (vn < v_min || vn > v_max)
                throw std::runtime_error(
                    "evolve: maximum principle violated in cell " + std::to_string(i) +
                    " at t=" + std::to_string(t + dt) + ": value " + std::to_string(vn) +
                    " outside [" + std::to_string(v_min) + ", " + std::to_string(v_max) + "]");
            v[static_cast<std::size_t>(i)] = vn;
        }

        ++step;
        // With a caller-imposed step the snapshot times are exact multiples
        // of it, so runs that share the step grid (flows, noise, transport)
        // can match times with plain equality.
        t = final_step ? t_end
            : opt.fixed_dt ? v0.time + static_cast<double>(step) * *opt.fixed_dt
                           : t + dt;

        if (step % opt.record_stride == 0 || final_step) {
            ScalarField snap;
            snap.grid = g;
            snap.time = t;
            snap.values = v;
            out.push_back(std::move(snap));
        }
    }
    // Degenerate call with t_end == v0.time: still provide a final snapshot
    // so callers can rely on out.back().time == t_end.
    if (out.size() == 1 && t_end > v0.time) out.push_back(v0);
    return out;
}

namespace {

void check_diagnostic_inputs(const std::vector<ScalarField>& snaps,
                             const TestFunction& phi,
                             const TestFunction& window) {
    if (snaps.size() < 2)
        throw std::invalid_argument("residual: need at least 2 snapshots");
    for (std::size_t j = 1; j < snaps.size(); ++j) {
        require_same_grid(snaps[j - 1], snaps[j], "residual");
        if (!(snaps[j].time > snaps[j - 1].time))
            throw std::invalid_argument("residual: snapshot times must increase");
    }
    const Grid1D& g = snaps.front().grid;
    if (!(phi.support_lo() > g.x_min && phi.support_hi() < g.x_max))
        throw std::invalid_argument(
            "residual: test function support must lie strictly inside the domain");
    if (!(window.support_lo() > snaps.front().time &&
          window.support_hi() < snaps.back().time))
        throw std::invalid_argument(
            "residual: time window must lie strictly inside the recorded span");
}

// Shared bilinear form: integral of eta(v) phi w' + q(v) phi' w over the
// space-time slab, midpoint in x, trapezoid over recorded times.
double space_time_form(const std::vector<ScalarField>& snaps,
                       const std::function<double(double)>& eta,
                       const std::function<double(double)>& q,
                       const TestFunction& phi,
                       const TestFunction& window) {
    const Grid1D& g = snaps.front().grid;
    const double dx = g.dx();

    // Only cells inside the support of phi contribute.
    int i_lo = std::max(0, static_cast<int>((phi.support_lo() - g.x_min) / dx) - 1);
    int i_hi = std::min(g.n_cells - 1,
                        static_cast<int>((phi.support_hi() - g.x_min) / dx) + 1);

    std::vector<double> f(snaps.size());
    for (std::size_t j = 0; j < snaps.size(); ++j) {
        double s_eta = 0.0, s_q = 0.0;
        const std::vector<double>& v = snaps[j].values;
        for (int i = i_lo; i <= i_hi; ++i) {
            double x = g.center(i);
            s_eta += eta(v[static_cast<std::size_t>(i)]) * phi(x);
            s_q += q(v[static_cast<std::size_t>(i)]) * phi.d1(x);
        }
        double t = snaps[j].time;
        f[j] = (s_eta * window.d1(t) + s_q * window(t)) * dx;
    }
    double r = 0.0;
    for (std::size_t j = 1; j < snaps.size(); ++j)
        r += 0.5 * (f[j - 1] + f[j]) * (snaps[j].time - snaps[j - 1].time);
    return r;
}

}  // namespace

double entropy_residual(const std::vector<ScalarField>& snaps,
                        const EntropyPair& pair,
                        const TestFunction& phi,
                        const TestFunction& window) {
    check_diagnostic_inputs(snaps, phi, window);
    return space_time_form(snaps, pair.eta, pair.q, phi, window);
}

double weak_form_residual(const std::vector<ScalarField>& snaps,
                          const FluxModel& flux,
                          const TestFunction& phi,
                          const TestFunction& window) {
    check_diagnostic_inputs(snaps, phi, window);
    return space_time_form(
        snaps, [](double v) { return v; }, flux.F, phi, window);
}

double quadrature_tolerance(const std::vector<ScalarField>& snaps, double coeff) {
    if (snaps.size() < 2)
        throw std::invalid_argument("quadrature_tolerance: need 2+ snapshots");
    double span = snaps.back().time - snaps.front().time;
    double mean_dt = span / static_cast<double>(snaps.size() - 1);
    return coeff * (snaps.front().grid.dx() + mean_dt);
}

}  // namespace sclaw
