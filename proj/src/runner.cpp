#include "sclaw/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "sclaw/brownian.hpp"
#include "sclaw/conservation.hpp"
#include "sclaw/csv.hpp"
#include "sclaw/flow.hpp"
#include "sclaw/flux.hpp"
#include "sclaw/mollify.hpp"
#include "sclaw/rng.hpp"
#include "sclaw/stats.hpp"
#include "sclaw/transport.hpp"
#include "sclaw/version.hpp"

namespace sclaw {

bool RunReport::all_passed() const {
    for (const InvariantCheck& c : checks)
        if (!c.passed) return false;
    return true;
}

bool RunReport::has_metric(const std::string& key) const {
    return metrics.count(key) > 0;
}

double RunReport::metric(const std::string& key) const {
    auto it = metrics.find(key);
    if (it == metrics.end())
        throw std::out_of_range("run report has no metric '" + key + "'");
    return it->second;
}

namespace {

constexpr double kKruzkovDelta = 1e-3;  // smoothing of |v - k| in the entropy

// ---------------------------------------------------------------------------
// Initial data as exact cell averages
// ---------------------------------------------------------------------------

ScalarField cell_average_initial(const InitialData& d, const Grid1D& g, double t) {
    ScalarField f = make_field(g, t);
    switch (d.kind) {
        case InitialData::Kind::constant:
            std::fill(f.values.begin(), f.values.end(), d.value);
            break;
        case InitialData::Kind::riemann:
            for (int i = 0; i < g.n_cells; ++i) {
                double a = g.face(i);
                double frac = std::clamp((d.jump_at - a) / g.dx(), 0.0, 1.0);
                f.values[static_cast<std::size_t>(i)] =
                    frac * d.left + (1.0 - frac) * d.right;
            }
            break;
        case InitialData::Kind::bump: {
            // 5-point Gauss-Legendre per cell; exact to the smoothness of the
            // bump at any resolution this tool runs at.
            static const double node[5] = {0.0, -0.5384693101056831, 0.5384693101056831,
                                           -0.9061798459386640, 0.9061798459386640};
            static const double wq[5] = {0.5688888888888889, 0.4786286704993665,
                                         0.4786286704993665, 0.2369268850561891,
                                         0.2369268850561891};
            for (int i = 0; i < g.n_cells; ++i) {
                double mid = g.center(i), half = 0.5 * g.dx();
                double s = 0.0;
                for (int q = 0; q < 5; ++q)
                    s += wq[q] * initial_value(d, mid + half * node[q]);
                f.values[static_cast<std::size_t>(i)] = 0.5 * s;  // weights sum to 2
            }
            break;
        }
    }
    return f;
}

// Largest |F'| over the invariant range of the data (discrete maximum
// principle keeps v inside [lo, hi] forever), with a hair of inflation so the
// derived fixed step never trips the solver's own CFL guard.
double wave_speed_bound(const FluxModel& flux, double lo, double hi) {
    double m = std::max(std::abs(flux.F_prime(lo)), std::abs(flux.F_prime(hi)));
    for (int i = 1; i < 256; ++i) {
        double v = lo + (hi - lo) * static_cast<double>(i) / 256.0;
        m = std::max(m, std::abs(flux.F_prime(v)));
    }
    return m * (1.0 + 1e-9);
}

InvariantCheck make_check(const std::string& name, double measured,
                          const std::string& relation, double bound,
                          const std::string& detail) {
    InvariantCheck c;
    c.name = name;
    c.measured = measured;
    c.bound = bound;
    c.relation = relation;
    c.detail = detail;
    if (std::isnan(measured)) {
        c.passed = false;
    } else if (relation == "<=") {
        c.passed = measured <= bound;
    } else if (relation == ">=") {
        c.passed = measured >= bound;
    } else if (relation == ">") {
        c.passed = measured > bound;
    } else if (relation == "<") {
        c.passed = measured < bound;
    } else {
        throw std::logic_error("unknown check relation " + relation);
    }
    return c;
}

// Mid-step Brownian bridge refinement: halve every increment of `path`
// consistently with the law of Brownian motion, keeping the original values
// at the coarse times.  Used to compare weak residuals across resolutions on
// the *same* realization.
BrownianPath refine_path(const BrownianPath& path, std::uint64_t bridge_seed) {
    BrownianPath fine;
    fine.seed = path.seed;
    fine.dt = 0.5 * path.dt;
    fine.n_steps = 2 * path.n_steps;
    fine.increments.resize(static_cast<std::size_t>(fine.n_steps));
    fine.cumulative.resize(static_cast<std::size_t>(fine.n_steps) + 1);
    const double half_sd = 0.5 * std::sqrt(path.dt);
    for (int k = 0; k < path.n_steps; ++k) {
        double dB = path.increments[static_cast<std::size_t>(k)];
        // B(t + dt/2) | endpoints ~ N(midpoint, dt/4)
        double first = 0.5 * dB +
                       half_sd * rng::normal(bridge_seed, static_cast<std::uint64_t>(k));
        fine.increments[static_cast<std::size_t>(2 * k)] = first;
        fine.increments[static_cast<std::size_t>(2 * k) + 1] = dB - first;
    }
    fine.cumulative[0] = 0.0;
    for (int k = 0; k < fine.n_steps; ++k)
        fine.cumulative[static_cast<std::size_t>(k) + 1] =
            fine.cumulative[static_cast<std::size_t>(k)] +
            fine.increments[static_cast<std::size_t>(k)];
    return fine;
}

}  // namespace

RunReport run_scenario(const ScenarioSpec& spec, const RunOptions& opt) {
    {
        std::vector<ValidationIssue> issues = validate_spec(spec);
        if (!issues.empty()) {
            std::string msg = "scenario '" + spec.name + "' is invalid:";
            for (const ValidationIssue& is : issues) msg += "\n  - " + is.message;
            throw std::invalid_argument(msg);
        }
    }
    if (opt.out_dir.empty())
        throw std::invalid_argument("run_scenario: out_dir must not be empty");
    namespace fs = std::filesystem;
    fs::create_directories(opt.out_dir);
    const auto wall0 = std::chrono::steady_clock::now();

    RunReport rep;
    rep.scenario_name = spec.name;
    rep.out_dir = opt.out_dir;

    auto has = [&](const char* o) {
        return std::find(spec.outputs.begin(), spec.outputs.end(), o) !=
               spec.outputs.end();
    };
    auto path_of = [&](const char* f) { return (fs::path(opt.out_dir) / f).string(); };
    auto note = [&](const std::string& line) {
        if (!opt.quiet) std::cout << "[" << spec.name << "] " << line << "\n";
    };

    const Grid1D g = spec.grid();
    const double dx = g.dx();
    const double T = spec.t_end;
    const int n_cells = g.n_cells;
    const FluxModel flux = flux_by_label(spec.flux_label);

    // ------------------------------------------------------------------
    // 1. Conservation law on a shared fixed step.  All stochastic pieces
    //    (Brownian grid, flows, finite-volume transport) reuse this step so
    //    times match exactly across solvers.
    // ------------------------------------------------------------------
    ScalarField v0 = cell_average_initial(spec.v0, g, 0.0);
    const double vmin0 = *std::min_element(v0.values.begin(), v0.values.end());
    const double vmax0 = *std::max_element(v0.values.begin(), v0.values.end());
    const double max_speed = wave_speed_bound(flux, vmin0, vmax0);

    long n_steps = max_speed > 0.0
                       ? static_cast<long>(std::ceil(T * max_speed / (spec.cfl * dx)))
                       : 0;
    n_steps = std::max<long>(n_steps, 100);  // resolve the noise even when drift is slow
    n_steps = ((n_steps + 3) / 4) * 4;       // quarter-period records sit on the grid
    const double dt = T / static_cast<double>(n_steps);

    EvolveOptions eopt;
    eopt.cfl = spec.cfl;
    eopt.fixed_dt = dt;
    const std::vector<ScalarField> v_snaps = evolve_conservation_law(v0, flux, T, eopt);
    if (static_cast<long>(v_snaps.size()) != n_steps + 1)
        throw std::runtime_error("runner: solver produced " +
                                 std::to_string(v_snaps.size()) + " snapshots, expected " +
                                 std::to_string(n_steps + 1));
    note("conservation solve: " + std::to_string(n_steps) + " steps, dt = " +
         format_double(dt));

    rep.metrics["run.n_steps"] = static_cast<double>(n_steps);
    rep.metrics["run.dt"] = dt;
    rep.metrics["run.dx"] = dx;
    rep.metrics["run.max_speed"] = max_speed;

    const std::vector<int> rec_steps = {0, static_cast<int>(n_steps / 4),
                                        static_cast<int>(n_steps / 2),
                                        static_cast<int>(3 * n_steps / 4),
                                        static_cast<int>(n_steps)};
    std::vector<double> rec_times(5);
    for (int r = 0; r < 4; ++r) rec_times[static_cast<std::size_t>(r)] = rec_steps[static_cast<std::size_t>(r)] * dt;
    rec_times[4] = T;

    if (has("snapshots")) {
        CsvWriter w(path_of("snapshots.csv"), "t,x,value");
        for (int r = 0; r < 5; ++r) {
            const ScalarField& f = v_snaps[static_cast<std::size_t>(rec_steps[static_cast<std::size_t>(r)])];
            for (int i = 0; i < n_cells; ++i)
                w.row(rec_times[static_cast<std::size_t>(r)], g.center(i),
                      f.values[static_cast<std::size_t>(i)]);
        }
    }

    // ------------------------------------------------------------------
    // 2. Entropy production across a Kruzkov ladder
    // ------------------------------------------------------------------
    if (has("entropy")) {
        const double quad_tol = quadrature_tolerance(v_snaps, spec.tol.quadrature_coeff);
        std::vector<double> ks;
        if (vmax0 > vmin0)
            for (double f : {0.0, 0.25, 0.5, 0.75, 1.0})
                ks.push_back(vmin0 + f * (vmax0 - vmin0));
        else
            ks.push_back(vmin0);

        double phi_center, phi_width;
        if (spec.v0.kind == InitialData::Kind::riemann) {
            double sigma = spec.v0.left != spec.v0.right
                               ? (flux.F(spec.v0.left) - flux.F(spec.v0.right)) /
                                     (spec.v0.left - spec.v0.right)
                               : 0.0;
            phi_center = spec.v0.jump_at + 0.5 * sigma * T;
            phi_width = std::max(1.0, std::abs(sigma) * T) + 1.0;
        } else if (spec.v0.kind == InitialData::Kind::bump) {
            phi_center = spec.v0.center;
            phi_width = spec.v0.width + max_speed * T + 0.5;
        } else {
            phi_center = 0.5 * (spec.x_min + spec.x_max);
            phi_width = 0.25 * (spec.x_max - spec.x_min);
        }
        double max_width = std::min(phi_center - spec.x_min, spec.x_max - phi_center) -
                           2.0 * dx;
        phi_width = std::min(phi_width, max_width);
        if (!(phi_width > 4.0 * dx))
            throw std::runtime_error("runner: domain too small for the entropy probe");
        const TestFunction phi = smooth_bump(phi_center, phi_width);
        const TestFunction window = smooth_bump(0.5 * T, 0.45 * T);

        CsvWriter w(path_of("entropy.csv"), "k,residual,quad_tol");
        double min_res = std::numeric_limits<double>::infinity();
        double mid_res = 0.0;
        for (std::size_t j = 0; j < ks.size(); ++j) {
            EntropyPair pair =
                smoothed_kruzkov(ks[j], kKruzkovDelta, flux, vmin0 - 1.0, vmax0 + 1.0);
            double res = entropy_residual(v_snaps, pair, phi, window);
            w.row(ks[j], res, quad_tol);
            min_res = std::min(min_res, res);
            if (j == ks.size() / 2) mid_res = res;
        }
        rep.metrics["entropy.min_residual"] = min_res;
        rep.metrics["entropy.quad_tol"] = quad_tol;
        rep.checks.push_back(make_check("entropy_nonneg", min_res, ">=", -quad_tol,
                                        "Kruzkov production across the k-ladder"));
        if (spec.flux_label == "burgers" &&
            spec.v0.kind == InitialData::Kind::riemann && spec.v0.left > spec.v0.right) {
            rep.metrics["entropy.mid_residual"] = mid_res;
            rep.checks.push_back(make_check("entropy_production", mid_res, ">", 0.0,
                                            "strict dissipation at the shock, mid k"));
        }
    }

    // ------------------------------------------------------------------
    // 3. Mollification ladder: smoothed drift samplers + smoothed density
    // ------------------------------------------------------------------
    const int n_rungs = static_cast<int>(spec.epsilon_ladder_dx.size());
    std::vector<double> eps_abs(static_cast<std::size_t>(n_rungs));
    for (int k = 0; k < n_rungs; ++k)
        eps_abs[static_cast<std::size_t>(k)] = spec.epsilon_ladder_dx[static_cast<std::size_t>(k)] * dx;

    const ScalarField u0_avg = cell_average_initial(spec.u0, g, 0.0);
    std::vector<ScalarField> u0_eps;
    std::vector<std::vector<double>> face_cum;
    std::vector<double> mass0(static_cast<std::size_t>(n_rungs));
    std::vector<DriftSampler> drift;
    u0_eps.reserve(static_cast<std::size_t>(n_rungs));
    face_cum.reserve(static_cast<std::size_t>(n_rungs));
    drift.reserve(static_cast<std::size_t>(n_rungs));
    for (int k = 0; k < n_rungs; ++k) {
        Mollifier moll = bump_mollifier(eps_abs[static_cast<std::size_t>(k)]);
        u0_eps.push_back(mollify(u0_avg, moll));
        face_cum.push_back(face_primitive(u0_eps.back()));
        mass0[static_cast<std::size_t>(k)] = face_cum.back().back();
        std::vector<ScalarField> smoothed;
        smoothed.reserve(v_snaps.size());
        for (const ScalarField& s : v_snaps) smoothed.push_back(mollify(s, moll));
        drift.emplace_back(std::move(smoothed));
    }
    note("mollification ladder ready (" + std::to_string(n_rungs) + " rungs)");

    // ------------------------------------------------------------------
    // 4. Flow geometry shared by all paths
    // ------------------------------------------------------------------
    double slo = 0.0, shi = 0.0;
    initial_support(spec.u0, slo, shi);
    const double max_abs_v = std::max(std::abs(vmin0), std::abs(vmax0));
    // Start points must bracket every preimage of a face carrying density.
    // Brownian displacement cancels between forward image and target, so the
    // margin only needs the drift spread plus smoothing widths.
    const double pad = 2.0 * max_abs_v * T + 2.0 * eps_abs.front() + 2.0 * dx + 0.5;
    const double start_lo = std::max(spec.x_min, slo - pad);
    const double start_hi = std::min(spec.x_max, shi + pad);
    long j_lo = std::max(0L, static_cast<long>(std::floor((start_lo - spec.x_min) / dx)));
    long j_hi = std::min(static_cast<long>(n_cells),
                         static_cast<long>(std::ceil((start_hi - spec.x_min) / dx)));
    std::vector<double> starts;
    for (long j = j_lo; j <= j_hi; ++j) starts.push_back(g.face(static_cast<int>(j)));

    FlowOptions fopt;
    fopt.record_times = rec_times;
    fopt.exit_lo = spec.x_min - 8.0 * std::sqrt(T) - 1.0;
    fopt.exit_hi = spec.x_max + 8.0 * std::sqrt(T) + 1.0;

    std::vector<double> targets(static_cast<std::size_t>(n_cells) + 1);
    for (int j = 0; j <= n_cells; ++j) targets[static_cast<std::size_t>(j)] = g.face(j);

    // ------------------------------------------------------------------
    // 5. Monte Carlo over paths, rung by rung (common random numbers: path p
    //    sees the same Brownian realization on every rung)
    // ------------------------------------------------------------------
    std::optional<CsvWriter> w_ens, w_sm, w_mass, w_cross, w_trans, w_det, w_detm, w_flow;
    if (has("ensemble"))
        w_ens.emplace(path_of("ensemble.csv"), "epsilon,t,x,mean_u,mean_u_sq,se");
    if (has("second_moment"))
        w_sm.emplace(path_of("second_moment.csv"), "epsilon,t,value,se");
    if (has("mass_audit"))
        w_mass.emplace(path_of("mass_audit.csv"), "epsilon,path_id,t,method,relative_drift");
    if (has("cross_validation"))
        w_cross.emplace(path_of("cross_validation.csv"), "epsilon,path_id,l1_distance");
    if (has("translation_error"))
        w_trans.emplace(path_of("translation_error.csv"), "epsilon,path_id,l1_error");
    if (has("deterministic_density")) {
        w_det.emplace(path_of("deterministic_density.csv"), "epsilon,t,x,value");
        w_detm.emplace(path_of("det_moments.csv"), "epsilon,t,l2_lagrangian,l2_grid");
    }
    const bool dump_flow = spec.flow_dumps || has("flow_debug");
    if (dump_flow)
        w_flow.emplace(path_of("flow_debug.csv"), "path_id,t,x0,phi,jacobian");

    const std::vector<double> u0_raw_cum = face_primitive(u0_avg);
    const bool do_translation =
        w_trans && spec.v0.kind == InitialData::Kind::constant;

    double max_mass_drift = 0.0;
    double min_u = std::numeric_limits<double>::infinity();
    double max_cross = 0.0;
    double trans_max_finest = 0.0;
    std::vector<double> sm_tend(static_cast<std::size_t>(n_rungs), 0.0);
    std::vector<double> det_lag_tend(static_cast<std::size_t>(n_rungs), 0.0);

    ContinuityOptions copt;
    copt.record_steps = rec_steps;

    for (int k = 0; k < n_rungs; ++k) {
        const double eps = eps_abs[static_cast<std::size_t>(k)];
        const bool finest = (k == n_rungs - 1);
        const double m0 = mass0[static_cast<std::size_t>(k)];
        const double m0_denom = m0 > 0.0 ? m0 : 1.0;

        DensityEnsemble ens;
        ens.epsilon = eps;
        ens.record_times = rec_times;
        ens.path_seeds.resize(static_cast<std::size_t>(spec.n_paths));
        ens.paths.assign(static_cast<std::size_t>(spec.n_paths), {});

        for (int p = 0; p < spec.n_paths; ++p) {
            const std::uint64_t seed_p =
                derive_path_seed(spec.base_seed, static_cast<std::uint64_t>(p));
            ens.path_seeds[static_cast<std::size_t>(p)] = seed_p;
            const BrownianPath bp = sample_brownian(seed_p, dt, static_cast<int>(n_steps));

            FlowRealization flow = solve_flow_sde(drift[static_cast<std::size_t>(k)], bp, starts, fopt);
            InverseFlow inv = invert_flow(flow, targets);

            auto& prec = ens.paths[static_cast<std::size_t>(p)];
            prec.reserve(5);
            for (int r = 0; r < 5; ++r) {
                PushforwardField pf = pushforward_density_cellavg(
                    u0_eps[static_cast<std::size_t>(k)], face_cum[static_cast<std::size_t>(k)],
                    inv, rec_times[static_cast<std::size_t>(r)], spec.tol.mass_tol);
                const double drift_rel = std::abs(mass(pf.u) - m0) / m0_denom;
                max_mass_drift = std::max(max_mass_drift, drift_rel);
                if (w_mass)
                    w_mass->row(eps, p, rec_times[static_cast<std::size_t>(r)],
                                "characteristics", drift_rel);
                min_u = std::min(min_u, *std::min_element(pf.u.values.begin(),
                                                          pf.u.values.end()));
                prec.push_back(std::move(pf.u));
            }

            // Same realization through the finite-volume continuity solver.
            const std::vector<ScalarField> fv =
                evolve_continuity_fv(u0_eps[static_cast<std::size_t>(k)],
                                     drift[static_cast<std::size_t>(k)], bp, copt);
            if (fv.size() != 5)
                throw std::runtime_error("runner: unexpected finite-volume record count");
            double pcross = 0.0;
            for (int r = 0; r < 5; ++r) {
                const ScalarField& fr = fv[static_cast<std::size_t>(r)];
                pcross = std::max(pcross,
                                  l1_distance(prec[static_cast<std::size_t>(r)], fr));
                const double drift_rel = std::abs(mass(fr) - m0) / m0_denom;
                max_mass_drift = std::max(max_mass_drift, drift_rel);
                if (w_mass)
                    w_mass->row(eps, p, rec_times[static_cast<std::size_t>(r)],
                                "finite_volume", drift_rel);
                min_u = std::min(min_u, *std::min_element(fr.values.begin(),
                                                          fr.values.end()));
            }
            max_cross = std::max(max_cross, pcross);
            if (w_cross) w_cross->row(eps, p, pcross);

            if (do_translation) {
                const double shift = spec.v0.value * T + bp.cumulative.back();
                double l1 = 0.0;
                double prev = eval_face_primitive(g, u0_raw_cum, g.face(0) - shift);
                for (int i = 0; i < n_cells; ++i) {
                    double next = eval_face_primitive(g, u0_raw_cum, g.face(i + 1) - shift);
                    double ref = (next - prev) / dx;
                    l1 += std::abs(prec[4].values[static_cast<std::size_t>(i)] - ref) * dx;
                    prev = next;
                }
                w_trans->row(eps, p, l1);
                if (finest) trans_max_finest = std::max(trans_max_finest, l1);
            }

            if (dump_flow && finest && p < std::min(spec.n_paths, 3)) {
                for (int r = 0; r < 5; ++r)
                    for (std::size_t j = 0; j < starts.size(); ++j)
                        w_flow->row(p, rec_times[static_cast<std::size_t>(r)], starts[j],
                                    flow.forward[static_cast<std::size_t>(r)][j],
                                    flow.jacobian[static_cast<std::size_t>(r)][j]);
            }
        }

        // Rung statistics
        for (int r = 0; r < 5; ++r) {
            const double t_r = rec_times[static_cast<std::size_t>(r)];
            if (w_ens) {
                CellStats cs = ensemble_cell_stats(ens, t_r);
                for (int i = 0; i < n_cells; ++i)
                    w_ens->row(eps, t_r, g.center(i),
                               cs.mean_u.values[static_cast<std::size_t>(i)],
                               cs.mean_u_sq.values[static_cast<std::size_t>(i)],
                               cs.se.values[static_cast<std::size_t>(i)]);
            }
            if (has("second_moment")) {
                MomentEstimate est = ensemble_second_moment(
                    ens, t_r,
                    rng::counter_hash(spec.base_seed,
                                      9000 + static_cast<std::uint64_t>(k) * 16 +
                                          static_cast<std::uint64_t>(r)),
                    200);
                if (w_sm) w_sm->row(eps, t_r, est.value, est.se);
                if (r == 4) sm_tend[static_cast<std::size_t>(k)] = est.value;
            }
        }
        ens.paths.clear();

        // Zero-noise rerun: same pipeline, Brownian path identically zero.
        if (w_det) {
            const BrownianPath zp = zero_path(dt, static_cast<int>(n_steps));
            FlowRealization dflow = solve_flow_sde(drift[static_cast<std::size_t>(k)], zp, starts, fopt);
            InverseFlow dinv = invert_flow(dflow, targets);
            for (int r = 0; r < 5; ++r) {
                const double t_r = rec_times[static_cast<std::size_t>(r)];
                PushforwardField pf = pushforward_density_cellavg(
                    u0_eps[static_cast<std::size_t>(k)], face_cum[static_cast<std::size_t>(k)],
                    dinv, t_r, spec.tol.mass_tol);
                for (int i = 0; i < n_cells; ++i)
                    w_det->row(eps, t_r, g.center(i),
                               pf.u.values[static_cast<std::size_t>(i)]);
                // Lagrangian L2: integral of u0_eps(y)^2 / J(t, y) dy never
                // saturates at the grid scale, unlike the cell-average view.
                double lag = 0.0;
                const auto& jac = dflow.jacobian[static_cast<std::size_t>(r)];
                double f_prev = 0.0;
                for (std::size_t j = 0; j < starts.size(); ++j) {
                    double uy = value_at(u0_eps[static_cast<std::size_t>(k)], starts[j]);
                    double f_here = uy * uy / jac[j];
                    if (j > 0)
                        lag += 0.5 * (f_prev + f_here) * (starts[j] - starts[j - 1]);
                    f_prev = f_here;
                }
                w_detm->row(eps, t_r, lag, l2_norm_sq(pf.u));
                if (r == 4) det_lag_tend[static_cast<std::size_t>(k)] = lag;
            }
        }
        note("rung epsilon = " + format_double(eps) + " done (" +
             std::to_string(spec.n_paths) + " paths)");
    }

    // ------------------------------------------------------------------
    // 6. Martingale certificate (finest rung drift, fresh seed stream)
    // ------------------------------------------------------------------
    if (has("martingale")) {
        const double x0m = spec.u0.kind == InitialData::Kind::bump
                               ? spec.u0.center
                               : 0.5 * (slo + shi);
        const std::vector<double> eval_times = {0.25 * T, 0.5 * T, 0.75 * T, T};
        const auto ms = stochastic_exponential_mean(
            drift.back(), rng::counter_hash(spec.base_seed, 4242), spec.n_paths, x0m,
            dt, eval_times);
        CsvWriter w(path_of("martingale.csv"), "t,mean,se,n_paths");
        double max_sigma = 0.0;
        for (const MartingaleSample& s : ms) {
            w.row(s.t, s.mean, s.se, spec.n_paths);
            double sigma = s.se > 0.0
                               ? std::abs(s.mean - 1.0) / s.se
                               : (s.mean == 1.0
                                      ? 0.0
                                      : std::numeric_limits<double>::infinity());
            max_sigma = std::max(max_sigma, sigma);
        }
        rep.metrics["martingale.max_sigma"] = max_sigma;
        rep.checks.push_back(make_check("martingale_mean_one", max_sigma, "<=",
                                        spec.tol.ci_multiplier,
                                        "stochastic exponential stays mean-one"));
    }

    // ------------------------------------------------------------------
    // 7. Commutator decay across the ladder
    // ------------------------------------------------------------------
    if (has("decay")) {
        std::vector<ScalarField> v5;
        for (int r = 0; r < 5; ++r)
            v5.push_back(v_snaps[static_cast<std::size_t>(rec_steps[static_cast<std::size_t>(r)])]);
        DecayTable table = commutator_l2_decay(v5, v5, eps_abs);
        CsvWriter w(path_of("decay.csv"), "epsilon,l2_norm,fitted_slope");
        const std::string slope_cell =
            table.slope ? format_double(*table.slope) : std::string();
        double max_norm = 0.0;
        for (const DecayPoint& pt : table.points) {
            w.raw_row(format_double(pt.epsilon) + "," + format_double(pt.l2_norm) +
                      "," + slope_cell);
            max_norm = std::max(max_norm, pt.l2_norm);
        }
        if (table.exact) {
            rep.metrics["decay.max_norm"] = max_norm;
            rep.checks.push_back(make_check("decay_exact", max_norm, "<=", kExactDecayTol,
                                            "commutator vanishes identically"));
        } else {
            if (n_rungs >= 2) {
                double max_ratio = 0.0;
                for (int i = 0; i + 1 < n_rungs; ++i) {
                    double a = table.points[static_cast<std::size_t>(i)].l2_norm;
                    double b = table.points[static_cast<std::size_t>(i) + 1].l2_norm;
                    max_ratio = std::max(
                        max_ratio, a > 0.0 ? b / a
                                           : std::numeric_limits<double>::infinity());
                }
                rep.metrics["decay.max_ratio"] = max_ratio;
                rep.checks.push_back(make_check("decay_monotone", max_ratio, "<", 1.0,
                                                "norms shrink with epsilon"));
            }
            if (table.slope && spec.v0.kind != InitialData::Kind::riemann) {
                rep.metrics["decay.slope"] = *table.slope;
                rep.checks.push_back(make_check("decay_slope", *table.slope, ">=",
                                                kDecaySlopeMin,
                                                "log-log rate for smooth drift"));
            } else if (table.slope) {
                rep.metrics["decay.slope"] = *table.slope;
            }
        }
    }

    // ------------------------------------------------------------------
    // 8. Weak-residual refinement: the Ito form residual of the
    //    finite-volume solution shrinks when dx and dt are halved on the
    //    same (bridge-refined) realization.
    // ------------------------------------------------------------------
    if (has("weak_residual")) {
        const int n_wr = std::min(spec.n_paths, 100);
        const TestFunction phi_wr =
            smooth_bump(0.5 * (spec.x_min + spec.x_max), 0.45 * (spec.x_max - spec.x_min));

        const Grid1D g2 = make_grid(spec.x_min, spec.x_max, 2 * n_cells);
        const ScalarField v0f = cell_average_initial(spec.v0, g2, 0.0);
        EvolveOptions ef;
        ef.cfl = spec.cfl;
        ef.fixed_dt = 0.5 * dt;
        const std::vector<ScalarField> v_snaps_f =
            evolve_conservation_law(v0f, flux, T, ef);
        if (static_cast<long>(v_snaps_f.size()) != 2 * n_steps + 1)
            throw std::runtime_error("runner: refined solver snapshot count mismatch");
        const Mollifier moll_f = bump_mollifier(eps_abs.back());
        std::vector<ScalarField> smoothed_f;
        smoothed_f.reserve(v_snaps_f.size());
        for (const ScalarField& s : v_snaps_f) smoothed_f.push_back(mollify(s, moll_f));
        const DriftSampler drift_f(std::move(smoothed_f));
        const ScalarField u0f = mollify(cell_average_initial(spec.u0, g2, 0.0), moll_f);

        ContinuityOptions c_all;
        for (long s = 0; s <= n_steps; ++s) c_all.record_steps.push_back(static_cast<int>(s));
        ContinuityOptions c_all_f;
        for (long s = 0; s <= 2 * n_steps; ++s) c_all_f.record_steps.push_back(static_cast<int>(s));

        CsvWriter w(path_of("weak_residual.csv"), "resolution,path_id,abs_residual");
        std::vector<double> res_c, res_f;
        for (int p = 0; p < n_wr; ++p) {
            const std::uint64_t seed_p =
                derive_path_seed(spec.base_seed, static_cast<std::uint64_t>(p));
            const BrownianPath bp = sample_brownian(seed_p, dt, static_cast<int>(n_steps));
            const auto u_all = evolve_continuity_fv(
                u0_eps.back(), drift.back(), bp, c_all);
            double rc = std::abs(spde_weak_residual(u_all, drift.back(), bp, phi_wr));
            w.row("default", p, rc);
            res_c.push_back(rc);

            const BrownianPath bpf =
                refine_path(bp, rng::counter_hash(spec.base_seed,
                                                  5000 + static_cast<std::uint64_t>(p)));
            const auto u_all_f = evolve_continuity_fv(u0f, drift_f, bpf, c_all_f);
            double rf = std::abs(spde_weak_residual(u_all_f, drift_f, bpf, phi_wr));
            w.row("refined", p, rf);
            res_f.push_back(rf);
        }
        // The residual is dominated by a mean-zero discretization error (the
        // quadratic-variation mismatch of the Ito sum), so per-path ratios
        // scatter wildly; the root-mean-square across paths is the statistic
        // that contracts deterministically (by ~1/sqrt(2)) under refinement.
        auto rms = [](const std::vector<double>& xs) {
            double s = 0.0;
            for (double v : xs) s += v * v;
            return std::sqrt(s / static_cast<double>(xs.size()));
        };
        const double rms_c = rms(res_c);
        const double rms_f = rms(res_f);
        const double ratio = rms_c > 0.0
                                 ? rms_f / rms_c
                                 : (rms_f == 0.0
                                        ? 0.0
                                        : std::numeric_limits<double>::infinity());
        rep.metrics["weak_residual.rms_default"] = rms_c;
        rep.metrics["weak_residual.rms_refined"] = rms_f;
        rep.metrics["weak_residual.ratio"] = ratio;
        rep.checks.push_back(make_check("weak_residual_refines", ratio, "<=", 1.0,
                                        "rms |R| shrinks at double resolution"));
        note("weak residual: rms " + format_double(rms_c) + " -> " +
             format_double(rms_f));
    }

    // ------------------------------------------------------------------
    // 9. Always-on invariants over the Monte Carlo sweep
    // ------------------------------------------------------------------
    rep.metrics["mass.max_rel_drift"] = max_mass_drift;
    rep.checks.push_back(make_check("mass_conservation", max_mass_drift, "<=",
                                    spec.tol.mass_tol,
                                    "worst relative mass drift, any path/method/time"));
    rep.metrics["u.min_value"] = min_u;
    rep.checks.push_back(make_check("density_nonneg", min_u, ">=", 0.0,
                                    "transported density stays nonnegative"));
    if (w_cross) {
        rep.metrics["cross.max_l1"] = max_cross;
        rep.checks.push_back(make_check("cross_validation", max_cross, "<=",
                                        spec.tol.cross_tol,
                                        "characteristics vs finite volume, any path"));
    }
    if (has("second_moment") && n_rungs >= 2) {
        const double hi = *std::max_element(sm_tend.begin(), sm_tend.end());
        const double lo = *std::min_element(sm_tend.begin(), sm_tend.end());
        const double ratio = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
        rep.metrics["second_moment.ratio"] = ratio;
        rep.metrics["second_moment.t_end_max"] = hi;
        rep.metrics["second_moment.t_end_min"] = lo;
        rep.checks.push_back(make_check("second_moment_ratio", ratio, "<=",
                                        kSecondMomentRatioBound,
                                        "noise keeps E[u^2] level across the ladder"));
    }
    if (w_det && n_rungs >= 2) {
        const double coarse = det_lag_tend.front();
        const double fine = det_lag_tend.back();
        const double growth =
            coarse > 0.0 ? fine / coarse : std::numeric_limits<double>::infinity();
        rep.metrics["det.growth_ratio"] = growth;
        rep.checks.push_back(make_check("det_concentration", growth, ">=", kDetGrowthMin,
                                        "zero-noise L2 blows up down the ladder"));
    }
    if (do_translation) {
        rep.metrics["translation.max_l1"] = trans_max_finest;
        rep.checks.push_back(make_check("translation_oracle", trans_max_finest, "<=",
                                        kTranslationTol,
                                        "pushforward matches u0(x - c t - B_t)"));
    }

    // ------------------------------------------------------------------
    // 10. Invariants file, report, manifest
    // ------------------------------------------------------------------
    {
        CsvWriter w(path_of("invariants.csv"), "name,passed,measured,bound,relation");
        for (const InvariantCheck& c : rep.checks)
            w.row(c.name, c.passed ? 1 : 0, c.measured, c.bound, c.relation);
    }
    {
        std::ofstream out(path_of("report.txt"));
        out << report_text(spec, rep);
    }
    {
        std::ofstream out(path_of("manifest.scn"));
        out << "# " << spec.name << " run manifest (version " << kVersion << ")\n"
            << "# re-run with: sclaw run <this file> --out-dir <dir>\n"
            << scenario_to_text(spec);
    }

    if (!opt.quiet) {
        for (const InvariantCheck& c : rep.checks)
            std::cout << "[" << spec.name << "] " << (c.passed ? "PASS" : "FAIL") << "  "
                      << c.name << ": " << format_double(c.measured) << " " << c.relation
                      << " " << format_double(c.bound) << "\n";
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0)
                .count();
        std::cout << "[" << spec.name << "] wall time: " << format_double(secs)
                  << " s\n";
    }
    return rep;
}

std::string report_text(const ScenarioSpec& spec, const RunReport& report) {
    std::ostringstream out;
    out << "scenario: " << spec.name << "\n";
    if (!spec.description.empty()) out << "description: " << spec.description << "\n";
    out << "grid: [" << format_double(spec.x_min) << ", " << format_double(spec.x_max)
        << ") with " << spec.n_cells << " cells (dx = " << format_double(spec.dx())
        << ")\n";
    out << "time: t_end = " << format_double(spec.t_end)
        << ", cfl = " << format_double(spec.cfl) << "\n";
    out << "ladder (units of dx):";
    for (double e : spec.epsilon_ladder_dx) out << " " << format_double(e);
    out << "\npaths: " << spec.n_paths << " (base seed " << spec.base_seed << ")\n";
    out << "\nchecks:\n";
    for (const InvariantCheck& c : report.checks)
        out << "  " << (c.passed ? "PASS" : "FAIL") << "  " << c.name << ": "
            << format_double(c.measured) << " " << c.relation << " "
            << format_double(c.bound) << "  (" << c.detail << ")\n";
    out << "\nmetrics:\n";
    for (const auto& [key, value] : report.metrics)
        out << "  " << key << " = " << format_double(value) << "\n";
    out << "\nresult: " << (report.all_passed() ? "all checks passed" : "CHECKS FAILED")
        << "\n";
    return out.str();
}

}  // namespace sclaw
