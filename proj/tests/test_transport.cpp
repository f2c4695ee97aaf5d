#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "sclaw/brownian.hpp"
#include "sclaw/flow.hpp"
#include "sclaw/grid.hpp"
#include "sclaw/mollify.hpp"
#include "sclaw/transport.hpp"

using namespace sclaw;

namespace {

std::vector<ScalarField> const_drift_snaps(const Grid1D& g, double c) {
    std::vector<ScalarField> snaps = {make_field(g, 0.0, c)};
    return snaps;
}

ScalarField bump_density(const Grid1D& g, double center, double width) {
    ScalarField u = make_field(g, 0.0);
    for (int i = 0; i < g.n_cells; ++i) {
        double s = (g.center(i) - center) / width;
        u.values[i] = std::abs(s) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0;
    }
    return u;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) xs[i] = a + (b - a) * i / (n - 1);
    return xs;
}

}  // namespace

// ============================================================================
// Pushforward along the flow
// ============================================================================

TEST_CASE("zero drift: cell-average pushforward is the exact shifted profile") {
    Grid1D g = make_grid(-6.0, 6.0, 480);
    ScalarField u0 = bump_density(g, 0.0, 1.0);
    DriftSampler drift(const_drift_snaps(g, 0.0));
    BrownianPath path = sample_brownian(31, 1.0 / 256.0, 256);
    FlowOptions opt;
    opt.record_times = {1.0};

    // starts = faces (nothing else needed: zero drift keeps ordering)
    std::vector<double> face_targets;
    for (int i = 0; i <= g.n_cells; ++i) face_targets.push_back(g.face(i));
    FlowRealization flow = solve_flow_sde(drift, path, face_targets, opt);
    InverseFlow inv = invert_flow(flow, face_targets);

    auto cum = face_primitive(u0);
    PushforwardField push =
        pushforward_density_cellavg(u0, cum, inv, 1.0, 1e-3);

    double b = path.cumulative.back();
    std::vector<double> expect = oracle::shift_cell_profile(u0.values, g.dx(), b);
    for (int i = 0; i < g.n_cells; ++i)
        CHECK(push.u.values[i] ==
              doctest::Approx(expect[i]).epsilon(1e-10).scale(1.0));
    CHECK(mass(push.u) == doctest::Approx(mass(u0)).epsilon(1e-12));
    CHECK(push.u.time == doctest::Approx(1.0));
}

TEST_CASE("pushforward conserves mass and positivity under smooth drift") {
    Grid1D g = make_grid(-8.0, 10.0, 900);
    ScalarField u0 = bump_density(g, 1.0, 1.5);
    Grid1D vg = make_grid(-8.0, 10.0, 300);
    ScalarField v = make_field(vg, 0.0);
    for (int i = 0; i < vg.n_cells; ++i)
        v.values[i] = 0.5 * std::tanh(vg.center(i));
    DriftSampler drift({v});

    BrownianPath path = sample_brownian(77, 1.0 / 512.0, 512);
    FlowOptions opt;
    opt.record_times = {0.5, 1.0};
    std::vector<double> starts = linspace(-7.0, 9.0, 1601);
    FlowRealization flow = solve_flow_sde(drift, path, starts, opt);

    std::vector<double> faces;
    for (int i = 0; i <= g.n_cells; ++i) faces.push_back(g.face(i));
    InverseFlow inv = invert_flow(flow, faces);
    auto cum = face_primitive(u0);

    for (double t : {0.5, 1.0}) {
        PushforwardField push = pushforward_density_cellavg(u0, cum, inv, t, 1e-3);
        CHECK(mass(push.u) == doctest::Approx(mass(u0)).epsilon(1e-10));
        for (double x : push.u.values) CHECK(x >= 0.0);
        CHECK(push.clamped_mass <= 1e-3 * mass(u0));
    }
}

TEST_CASE("pointwise and cell-average pushforwards agree on smooth data") {
    Grid1D g = make_grid(-6.0, 6.0, 600);
    ScalarField u0 = bump_density(g, 0.0, 1.2);
    DriftSampler drift(const_drift_snaps(g, 0.3));
    BrownianPath path = sample_brownian(5, 1.0 / 256.0, 256);
    FlowOptions opt;
    opt.record_times = {1.0};
    std::vector<double> starts = linspace(-5.5, 5.5, 1101);
    FlowRealization flow = solve_flow_sde(drift, path, starts, opt);

    PushforwardField pointwise = pushforward_density(u0, flow, 1.0, 1e-3);

    std::vector<double> faces;
    for (int i = 0; i <= g.n_cells; ++i) faces.push_back(g.face(i));
    InverseFlow inv_faces = invert_flow(flow, faces);
    PushforwardField cellavg =
        pushforward_density_cellavg(u0, face_primitive(u0), inv_faces, 1.0, 1e-3);

    CHECK(l1_distance(pointwise.u, cellavg.u) <= 5e-3 * mass(u0));
}

TEST_CASE("pushforward throws when too much mass leaves the covered region") {
    Grid1D g = make_grid(-2.0, 2.0, 100);
    ScalarField u0 = bump_density(g, 0.0, 1.0);
    DriftSampler drift(const_drift_snaps(g, 0.0));
    BrownianPath path = zero_path(0.01, 100);
    FlowOptions opt;
    opt.record_times = {1.0};
    // starts cover only half the support: clamping hits real mass
    FlowRealization flow = solve_flow_sde(drift, path, linspace(0.0, 3.0, 31), opt);
    CHECK_THROWS_AS(pushforward_density(u0, flow, 1.0, 1e-3),
                    std::runtime_error);
}

// ============================================================================
// Finite-volume continuity solve
// ============================================================================

TEST_CASE("FV one Brownian step with zero drift is the exact shift") {
    Grid1D g = make_grid(-4.0, 4.0, 320);
    ScalarField u0 = bump_density(g, 0.0, 1.0);
    DriftSampler drift(const_drift_snaps(g, 0.0));
    // single handcrafted step: dB = 0.37 * sqrt(dt) * xi ... use a real path
    BrownianPath path = sample_brownian(123, 0.25, 1);
    ContinuityOptions copt;
    auto snaps = evolve_continuity_fv(u0, drift, path, copt);
    REQUIRE(snaps.size() == 2);
    std::vector<double> expect =
        oracle::shift_cell_profile(u0.values, g.dx(), path.increments[0]);
    for (int i = 0; i < g.n_cells; ++i)
        CHECK(snaps[1].values[i] ==
              doctest::Approx(expect[i]).epsilon(1e-12).scale(1.0));
    CHECK(mass(snaps[1]) == doctest::Approx(mass(u0)).epsilon(1e-13));
}

TEST_CASE("FV advection converges to the translated profile") {
    // constant drift c with the zero path: u(T) = u0(x - cT); upwind smears
    // the profile at first order, so the L1 error halves with the mesh
    const double c = 0.8, T = 1.0;
    auto run = [&](int n) {
        Grid1D g = make_grid(-4.0, 4.0, n);
        ScalarField u0 = bump_density(g, -1.0, 1.0);
        DriftSampler drift(const_drift_snaps(g, c));
        int steps = 4 * n;  // CFL = c dt/dx = 0.8*8/(4*8) ... keep it at 0.2
        BrownianPath path = zero_path(T / steps, steps);
        auto snaps = evolve_continuity_fv(u0, drift, path, {});
        ScalarField exact = bump_density(g, -1.0 + c * T, 1.0);
        return l1_distance(snaps.back(), exact);
    };
    double e200 = run(200);
    double e400 = run(400);
    CHECK(e200 < 0.15);
    CHECK(e200 / e400 >= 1.3);
}

TEST_CASE("FV solve records requested steps and conserves mass pathwise") {
    Grid1D g = make_grid(-6.0, 8.0, 560);
    ScalarField u0 = bump_density(g, 0.5, 1.0);
    Grid1D vg = make_grid(-6.0, 8.0, 280);
    ScalarField v = make_field(vg, 0.0);
    for (int i = 0; i < vg.n_cells; ++i)
        v.values[i] = 0.4 * std::sin(vg.center(i));
    DriftSampler drift({v});
    BrownianPath path = sample_brownian(9, 1.0 / 400.0, 400);
    ContinuityOptions copt;
    copt.record_steps = {100, 200, 300};
    auto snaps = evolve_continuity_fv(u0, drift, path, copt);
    REQUIRE(snaps.size() == 5);  // 0, 100, 200, 300, 400
    CHECK(snaps[0].time == doctest::Approx(0.0));
    CHECK(snaps[2].time == doctest::Approx(0.5));
    CHECK(snaps[4].time == doctest::Approx(1.0));
    double m0 = mass(u0);
    for (const ScalarField& s : snaps) {
        CHECK(mass(s) == doctest::Approx(m0).epsilon(1e-12));
        for (double x : s.values) CHECK(x >= 0.0);
    }
}

TEST_CASE("FV solve rejects advective CFL violations") {
    Grid1D g = make_grid(-1.0, 1.0, 100);  // dx = 0.02
    ScalarField u0 = bump_density(g, 0.0, 0.5);
    DriftSampler drift(const_drift_snaps(g, 3.0));
    BrownianPath path = zero_path(0.1, 10);  // |v| dt / dx = 15
    CHECK_THROWS_AS(evolve_continuity_fv(u0, drift, path, {}),
                    std::runtime_error);
}

// ============================================================================
// Pathwise weak residual
// ============================================================================

TEST_CASE("weak residual of the FV solution is small pathwise") {
    Grid1D g = make_grid(-6.0, 8.0, 560);
    ScalarField u0 = bump_density(g, 0.5, 1.0);
    Grid1D vg = make_grid(-6.0, 8.0, 280);
    ScalarField v = make_field(vg, 0.0);
    for (int i = 0; i < vg.n_cells; ++i)
        v.values[i] = 0.4 * std::sin(vg.center(i));
    DriftSampler drift({v});
    const int n_steps = 400;
    BrownianPath path = sample_brownian(21, 1.0 / n_steps, n_steps);
    ContinuityOptions copt;
    for (int k = 0; k <= n_steps; ++k) copt.record_steps.push_back(k);
    auto snaps = evolve_continuity_fv(u0, drift, path, copt);
    REQUIRE(snaps.size() == static_cast<std::size_t>(n_steps + 1));

    TestFunction phi = smooth_bump(0.5, 5.0);
    double r = spde_weak_residual(snaps, drift, path, phi);
    CHECK(std::abs(r) <= 0.02 * mass(u0));
}

TEST_CASE("weak residual requires one snapshot per step") {
    Grid1D g = make_grid(-2.0, 2.0, 100);
    ScalarField u0 = bump_density(g, 0.0, 0.8);
    DriftSampler drift(const_drift_snaps(g, 0.0));
    BrownianPath path = zero_path(0.01, 100);
    auto snaps = evolve_continuity_fv(u0, drift, path, {});  // only 2 records
    TestFunction phi = smooth_bump(0.0, 1.5);
    CHECK_THROWS_AS(spde_weak_residual(snaps, drift, path, phi),
                    std::invalid_argument);
}

// ============================================================================
// Ensemble statistics
// ============================================================================

TEST_CASE("ensemble moments on a handcrafted two-path ensemble") {
    Grid1D g = make_grid(0.0, 1.0, 4);
    const double a = 0.6, b = 1.4;
    DensityEnsemble ens;
    ens.epsilon = 0.1;
    ens.record_times = {0.0, 1.0};
    ens.path_seeds = {1, 2};
    ens.paths.resize(2);
    ens.paths[0] = {make_field(g, 0.0, a), make_field(g, 1.0, a)};
    ens.paths[1] = {make_field(g, 0.0, b), make_field(g, 1.0, b)};

    // integral E[u^2] dx = (a^2 + b^2)/2 over a unit-length domain
    MomentEstimate m = ensemble_second_moment(ens, 1.0, 99);
    CHECK(m.value == doctest::Approx(0.5 * (a * a + b * b)).epsilon(1e-14));
    CHECK(m.se >= 0.0);
    CHECK(m.se <= std::abs(b * b - a * a));  // bootstrap spans the two paths

    CellStats stats = ensemble_cell_stats(ens, 1.0);
    for (int i = 0; i < g.n_cells; ++i) {
        CHECK(stats.mean_u.values[i] == doctest::Approx(0.5 * (a + b)));
        CHECK(stats.mean_u_sq.values[i] ==
              doctest::Approx(0.5 * (a * a + b * b)));
        // se of the mean over two samples: |a - b| / 2
        CHECK(stats.se.values[i] == doctest::Approx(0.5 * std::abs(b - a)));
    }
}

TEST_CASE("ensemble lookups validate the record time") {
    Grid1D g = make_grid(0.0, 1.0, 4);
    DensityEnsemble ens;
    ens.epsilon = 0.1;
    ens.record_times = {0.0, 1.0};
    ens.path_seeds = {1};
    ens.paths = {{make_field(g, 0.0, 1.0), make_field(g, 1.0, 1.0)}};
    CHECK_THROWS_AS(ensemble_second_moment(ens, 0.5, 7), std::invalid_argument);
    CHECK_THROWS_AS(ensemble_cell_stats(ens, 0.5), std::invalid_argument);
}

TEST_CASE("bootstrap standard error is reproducible across calls") {
    Grid1D g = make_grid(0.0, 1.0, 8);
    DensityEnsemble ens;
    ens.epsilon = 0.1;
    ens.record_times = {1.0};
    for (int p = 0; p < 12; ++p) {
        ens.path_seeds.push_back(p);
        ens.paths.push_back({make_field(g, 1.0, 0.5 + 0.1 * p)});
    }
    MomentEstimate m1 = ensemble_second_moment(ens, 1.0, 4242);
    MomentEstimate m2 = ensemble_second_moment(ens, 1.0, 4242);
    CHECK(m1.value == m2.value);
    CHECK(m1.se == m2.se);
    CHECK(m1.se > 0.0);
}
