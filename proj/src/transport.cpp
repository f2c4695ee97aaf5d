#include "sclaw/transport.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sclaw/stats.hpp"

namespace sclaw {

namespace {

void check_clamped_mass(const PushforwardField& f, double mass_tol,
                        const char* what) {
    double total = l1_norm(f.u);
    if (f.clamped_mass > mass_tol * std::max(total, 1e-300))
        throw std::runtime_error(
            std::string(what) + ": " + std::to_string(f.clamped_mass) +
            " of |u|-mass (total " + std::to_string(total) +
            ") relies on clamped preimages; flow start points do not bracket "
            "the transported support");
}

}  // namespace

PushforwardField pushforward_density(const ScalarField& u0_eps,
                                     const InverseFlow& inv, double t,
                                     double mass_tol) {
    const Grid1D& g = u0_eps.grid;
    const int n = g.n_cells;
    if (inv.targets.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("pushforward: inverse targets are not the cell centers");
    const int r = inv.time_index(t);

    PushforwardField out;
    out.u = make_field(g, t);
    const auto& psi = inv.psi[static_cast<std::size_t>(r)];
    const auto& ijac = inv.inv_jacobian[static_cast<std::size_t>(r)];
    const auto& clm = inv.clamped[static_cast<std::size_t>(r)];
    for (int i = 0; i < n; ++i) {
        double value = value_at(u0_eps, psi[static_cast<std::size_t>(i)]) *
                       ijac[static_cast<std::size_t>(i)];
        out.u.values[static_cast<std::size_t>(i)] = value;
        if (clm[static_cast<std::size_t>(i)]) {
            ++out.clamped_cells;
            out.clamped_mass += std::abs(value) * g.dx();
        }
    }
    require_finite(out.u, "pushforward");
    check_clamped_mass(out, mass_tol, "pushforward");
    return out;
}

PushforwardField pushforward_density(const ScalarField& u0_eps,
                                     const FlowRealization& flow, double t,
                                     double mass_tol) {
    std::vector<double> centers(static_cast<std::size_t>(u0_eps.grid.n_cells));
    for (int i = 0; i < u0_eps.grid.n_cells; ++i)
        centers[static_cast<std::size_t>(i)] = u0_eps.grid.center(i);
    return pushforward_density(u0_eps, invert_flow(flow, std::move(centers)), t,
                               mass_tol);
}

PushforwardField pushforward_density_cellavg(const ScalarField& u0_eps,
                                             const std::vector<double>& u0_face_cum,
                                             const InverseFlow& inv_faces,
                                             double t, double mass_tol) {
    const Grid1D& g = u0_eps.grid;
    const int n = g.n_cells;
    if (inv_faces.targets.size() != static_cast<std::size_t>(n) + 1)
        throw std::invalid_argument("pushforward_cellavg: inverse targets are not the faces");
    if (u0_face_cum.size() != static_cast<std::size_t>(n) + 1)
        throw std::invalid_argument("pushforward_cellavg: face cumulative size mismatch");
    const int r = inv_faces.time_index(t);

    const auto& psi = inv_faces.psi[static_cast<std::size_t>(r)];
    const auto& clm = inv_faces.clamped[static_cast<std::size_t>(r)];

    // Cumulative initial mass below each face preimage; differences give the
    // cell averages and total mass telescopes exactly.
    std::vector<double> cum(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i)
        cum[static_cast<std::size_t>(i)] =
            eval_face_primitive(g, u0_face_cum, psi[static_cast<std::size_t>(i)]);

    // For nonnegative data the cumulative is non-decreasing, but interpolating
    // it can overshoot by an ulp at segment boundaries; the resulting
    // last-digit negative averages are rounding noise and get clamped.  Larger
    // negatives (or any negatives of signed data) pass through untouched.
    const bool nonneg =
        *std::min_element(u0_eps.values.begin(), u0_eps.values.end()) >= 0.0;
    const double noise_floor = -1e-12 * (1.0 + std::abs(u0_face_cum.back()));

    PushforwardField out;
    out.u = make_field(g, t);
    for (int i = 0; i < n; ++i) {
        double value = (cum[static_cast<std::size_t>(i) + 1] -
                        cum[static_cast<std::size_t>(i)]) / g.dx();
        if (nonneg && value < 0.0 && value > noise_floor) value = 0.0;
        out.u.values[static_cast<std::size_t>(i)] = value;
        if (clm[static_cast<std::size_t>(i)] || clm[static_cast<std::size_t>(i) + 1]) {
            ++out.clamped_cells;
            out.clamped_mass += std::abs(value) * g.dx();
        }
    }
    require_finite(out.u, "pushforward_cellavg");
    check_clamped_mass(out, mass_tol, "pushforward_cellavg");
    return out;
}

std::vector<ScalarField> evolve_continuity_fv(const ScalarField& u0,
                                              const DriftSampler& drift,
                                              const BrownianPath& path,
                                              const ContinuityOptions& opt) {
    const Grid1D& g = u0.grid;
    const int n = g.n_cells;
    const double dx = g.dx();
    const double dt = path.dt;
    require_finite(u0, "continuity: initial data");

    // Advective stability; the Brownian shift is unconditionally stable.
    if (drift.max_abs_value() * dt > dx)
        throw std::runtime_error("continuity: advective CFL violation (max|v| dt = " +
                                 std::to_string(drift.max_abs_value() * dt) +
                                 " > dx = " + std::to_string(dx) + ")");
    if (opt.enable_diffusion && dt > dx * dx)
        throw std::runtime_error(
            "continuity: explicit diffusion requires dt <= dx^2");

    std::vector<int> records = opt.record_steps;
    records.push_back(0);
    records.push_back(path.n_steps);
    std::sort(records.begin(), records.end());
    records.erase(std::unique(records.begin(), records.end()), records.end());
    for (int k : records)
        if (k < 0 || k > path.n_steps)
            throw std::invalid_argument("continuity: record step out of range");

    const double t0 = u0.time;
    std::vector<double> u = u0.values;
    std::vector<double> work(static_cast<std::size_t>(n));
    std::vector<double> flux(static_cast<std::size_t>(n) + 1);

    // Under the CFL condition the upwind update is a convex combination, so
    // nonnegative data stays nonnegative; the flux-difference form can still
    // round a hair below zero.  Clamp only that last-digit noise, and only
    // for nonnegative data: real scheme violations must surface downstream.
    const bool nonneg = *std::min_element(u.begin(), u.end()) >= 0.0;
    double u_scale = 0.0;
    for (double ui : u) u_scale = std::max(u_scale, std::abs(ui));
    const double noise_floor = -1e-12 * (1.0 + u_scale);

    std::vector<ScalarField> out;
    std::size_t next_rec = 0;
    auto maybe_record = [&](int step) {
        if (next_rec < records.size() && records[next_rec] == step) {
            ScalarField snap;
            snap.grid = g;
            snap.time = t0 + step * dt;
            snap.values = u;
            out.push_back(std::move(snap));
            ++next_rec;
        }
    };
    maybe_record(0);

    for (int k = 0; k < path.n_steps; ++k) {
        const double t_k = t0 + k * dt;

        // --- upwind advection with face velocities (v_i + v_{i+1})/2 ---
        double v_prev = drift.value(t_k, g.center(0));
        flux[0] = v_prev * u[0];  // copy-cell ghost: same state on both sides
        for (int i = 1; i < n; ++i) {
            double v_here = drift.value(t_k, g.center(i));
            double a = 0.5 * (v_prev + v_here);
            flux[static_cast<std::size_t>(i)] =
                a >= 0.0 ? a * u[static_cast<std::size_t>(i) - 1]
                         : a * u[static_cast<std::size_t>(i)];
            v_prev = v_here;
        }
        flux[static_cast<std::size_t>(n)] = v_prev * u[static_cast<std::size_t>(n) - 1];
        const double lambda = dt / dx;
        for (int i = 0; i < n; ++i) {
            double wi = u[static_cast<std::size_t>(i)] -
                        lambda * (flux[static_cast<std::size_t>(i) + 1] -
                                  flux[static_cast<std::size_t>(i)]);
            if (nonneg && wi < 0.0 && wi > noise_floor) wi = 0.0;
            work[static_cast<std::size_t>(i)] = wi;
        }

        // --- exact conservative translation by dB_k ---
        const double s = path.increments[static_cast<std::size_t>(k)] / dx;
        const double fl = std::floor(s);
        const int mshift = static_cast<int>(fl);
        const double f = s - fl;  // in [0, 1)
        for (int i = 0; i < n; ++i) {
            int ia = i - mshift;      // source cell for the (1-f) part
            int ib = i - mshift - 1;  // source cell for the f part
            double ua = (ia >= 0 && ia < n) ? work[static_cast<std::size_t>(ia)] : 0.0;
            double ub = (ib >= 0 && ib < n) ? work[static_cast<std::size_t>(ib)] : 0.0;
            u[static_cast<std::size_t>(i)] = (1.0 - f) * ua + f * ub;
        }

        // --- optional explicit Ito correction ---
        if (opt.enable_diffusion) {
            for (int i = 0; i < n; ++i) {
                int lo = std::max(i - 1, 0), hi = std::min(i + 1, n - 1);
                work[static_cast<std::size_t>(i)] =
                    u[static_cast<std::size_t>(lo)] - 2.0 * u[static_cast<std::size_t>(i)] +
                    u[static_cast<std::size_t>(hi)];
            }
            const double mu = 0.5 * dt / (dx * dx);
            for (int i = 0; i < n; ++i)
                u[static_cast<std::size_t>(i)] += mu * work[static_cast<std::size_t>(i)];
        }

        for (int i = 0; i < n; ++i)
            if (!std::isfinite(u[static_cast<std::size_t>(i)]))
                throw std::runtime_error("continuity: blow-up in cell " + std::to_string(i) +
                                         " at step " + std::to_string(k + 1));
        maybe_record(k + 1);
    }
    return out;
}

double spde_weak_residual(const std::vector<ScalarField>& u_per_step,
                          const DriftSampler& drift,
                          const BrownianPath& path,
                          const TestFunction& phi) {
    if (u_per_step.size() != static_cast<std::size_t>(path.n_steps) + 1)
        throw std::invalid_argument(
            "weak residual: need one density snapshot per path step");
    const Grid1D& g = u_per_step.front().grid;
    if (!(phi.support_lo() > g.x_min && phi.support_hi() < g.x_max))
        throw std::invalid_argument(
            "weak residual: test function support must lie strictly inside the domain");
    const double dx = g.dx();
    const double dt = path.dt;
    const double t0 = u_per_step.front().time;

    auto pair_with = [&](const ScalarField& u, auto&& weight) {
        double s = 0.0;
        for (int i = 0; i < g.n_cells; ++i)
            s += u.values[static_cast<std::size_t>(i)] * weight(g.center(i));
        return s * dx;
    };

    double r = pair_with(u_per_step.back(), [&](double x) { return phi(x); }) -
               pair_with(u_per_step.front(), [&](double x) { return phi(x); });
    for (int k = 0; k < path.n_steps; ++k) {
        const ScalarField& u = u_per_step[static_cast<std::size_t>(k)];
        const double t_k = t0 + k * dt;
        double drift_term = 0.0, noise_term = 0.0, ito_term = 0.0;
        for (int i = 0; i < g.n_cells; ++i) {
            double x = g.center(i);
            double ui = u.values[static_cast<std::size_t>(i)];
            drift_term += ui * drift.value(t_k, x) * phi.d1(x);
            noise_term += ui * phi.d1(x);
            ito_term += ui * phi.d2(x);
        }
        r -= drift_term * dx * dt;
        r -= noise_term * dx * path.increments[static_cast<std::size_t>(k)];
        r -= 0.5 * ito_term * dx * dt;
    }
    return r;
}

namespace {

int ensemble_record_index(const DensityEnsemble& ens, double t) {
    for (std::size_t r = 0; r < ens.record_times.size(); ++r)
        if (std::abs(ens.record_times[r] - t) <= 1e-9 * (1.0 + std::abs(t)))
            return static_cast<int>(r);
    throw std::invalid_argument("ensemble: time " + std::to_string(t) +
                                " was not recorded");
}

}  // namespace

MomentEstimate ensemble_second_moment(const DensityEnsemble& ens, double t,
                                      std::uint64_t bootstrap_seed, int n_boot) {
    const int r = ensemble_record_index(ens, t);
    if (ens.paths.size() < 2)
        throw std::invalid_argument("ensemble: need 2+ paths for moment estimates");
    // Average u^2 cell by cell across paths first, then integrate the
    // resulting E[u^2] profile.  The uncertainty is bootstrapped over the
    // per-path integrals (the independent resampling unit).
    const ScalarField& first = ens.paths.front()[static_cast<std::size_t>(r)];
    const Grid1D& g = first.grid;
    const double inv_n = 1.0 / static_cast<double>(ens.paths.size());
    double integral = 0.0;
    for (int i = 0; i < g.n_cells; ++i) {
        double s2 = 0.0;
        for (const auto& path : ens.paths)
            s2 += path[static_cast<std::size_t>(r)].values[static_cast<std::size_t>(i)] *
                  path[static_cast<std::size_t>(r)].values[static_cast<std::size_t>(i)];
        integral += s2 * inv_n * g.dx();
    }
    std::vector<double> per_path(ens.paths.size());
    for (std::size_t p = 0; p < ens.paths.size(); ++p)
        per_path[p] = l2_norm_sq(ens.paths[p][static_cast<std::size_t>(r)]);
    MomentEstimate est;
    est.value = integral;
    est.se = bootstrap_se(per_path, n_boot, bootstrap_seed);
    return est;
}

CellStats ensemble_cell_stats(const DensityEnsemble& ens, double t) {
    const int r = ensemble_record_index(ens, t);
    if (ens.paths.empty()) throw std::invalid_argument("ensemble: no paths");
    const ScalarField& first = ens.paths.front()[static_cast<std::size_t>(r)];
    const Grid1D& g = first.grid;
    const std::size_t n_paths = ens.paths.size();

    CellStats cs;
    cs.mean_u = make_field(g, t);
    cs.mean_u_sq = make_field(g, t);
    cs.se = make_field(g, t);
    for (int i = 0; i < g.n_cells; ++i) {
        double s = 0.0, s2 = 0.0;
        for (std::size_t p = 0; p < n_paths; ++p) {
            double v = ens.paths[p][static_cast<std::size_t>(r)]
                            .values[static_cast<std::size_t>(i)];
            s += v;
            s2 += v * v;
        }
        double m = s / static_cast<double>(n_paths);
        cs.mean_u.values[static_cast<std::size_t>(i)] = m;
        cs.mean_u_sq.values[static_cast<std::size_t>(i)] =
            s2 / static_cast<double>(n_paths);
        double var = n_paths > 1
                         ? std::max(0.0, (s2 - static_cast<double>(n_paths) * m * m) /
                                             static_cast<double>(n_paths - 1))
                         : 0.0;
        cs.se.values[static_cast<std::size_t>(i)] =
            std::sqrt(var / static_cast<double>(n_paths));
    }
    return cs;
}

}  // namespace sclaw
