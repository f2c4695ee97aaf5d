#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sclaw/brownian.hpp"
#include "sclaw/csv.hpp"
#include "sclaw/grid.hpp"
#include "sclaw/rng.hpp"
#include "sclaw/stats.hpp"

using namespace sclaw;

// ============================================================================
// Grid and field arithmetic
// ============================================================================

TEST_CASE("grid faces and centers partition the domain") {
    Grid1D g = make_grid(-2.0, 4.0, 12);
    CHECK(g.dx() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(g.face(0) == -2.0);
    CHECK(g.face(12) == 4.0);
    CHECK(g.center(0) == doctest::Approx(-1.75));
    CHECK(g.center(11) == doctest::Approx(3.75));
    // center i sits midway between its faces
    for (int i = 0; i < g.n_cells; ++i)
        CHECK(g.center(i) == doctest::Approx(0.5 * (g.face(i) + g.face(i + 1))));
}

TEST_CASE("make_grid rejects degenerate input") {
    CHECK_THROWS_AS(make_grid(1.0, 1.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(2.0, 1.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(0.0, 1.0, 1), std::invalid_argument);
}

TEST_CASE("value_at reproduces linear fields and extends constantly") {
    Grid1D g = make_grid(0.0, 1.0, 10);
    ScalarField f = sample_field(g, 0.0, [](double x) { return 3.0 * x - 1.0; });
    // linear interpolation of samples of a linear function is exact between
    // the outermost centers
    for (double x : {0.05, 0.11, 0.5, 0.73, 0.95})
        CHECK(value_at(f, x) == doctest::Approx(3.0 * x - 1.0).epsilon(1e-14));
    // constant extension beyond the outer centers
    CHECK(value_at(f, -5.0) == f.values.front());
    CHECK(value_at(f, 5.0) == f.values.back());
}

TEST_CASE("norms and mass match hand-computed values") {
    Grid1D g = make_grid(0.0, 1.0, 4);  // dx = 0.25
    ScalarField f = make_field(g, 0.0);
    f.values = {1.0, -2.0, 3.0, 0.0};
    CHECK(mass(f) == doctest::Approx(0.5));           // (1-2+3+0)*0.25
    CHECK(l1_norm(f) == doctest::Approx(1.5));        // (1+2+3)*0.25
    CHECK(l2_norm_sq(f) == doctest::Approx(3.5));     // (1+4+9)*0.25
    CHECK(linf_norm(f) == doctest::Approx(3.0));
    ScalarField h = f;
    h.values = {0.0, -2.0, 1.0, 0.0};
    CHECK(l1_distance(f, h) == doctest::Approx(0.75));  // (1+0+2+0)*0.25
}

TEST_CASE("require_finite flags bad cells with their index") {
    Grid1D g = make_grid(0.0, 1.0, 3);
    ScalarField f = make_field(g, 0.25, 1.0);
    CHECK_NOTHROW(require_finite(f, "probe"));
    f.values[2] = std::nan("");
    CHECK_THROWS_WITH_AS(require_finite(f, "probe"),
                         doctest::Contains("cell 2"), std::runtime_error);
}

// ============================================================================
// CSV writing and double formatting
// ============================================================================

TEST_CASE("format_double round-trips exactly") {
    for (double v : {0.1, -1.0 / 3.0, 1e-300, 6.02e23, 0.0, -0.015,
                     0.007352941176470588}) {
        const std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
}

TEST_CASE("CsvWriter emits exactly the expected bytes") {
    namespace fs = std::filesystem;
    fs::path p = fs::temp_directory_path() / "sclaw_csv_probe.csv";
    {
        CsvWriter w(p, "a,b,c");
        w.row(1, 0.5, "x");
        w.row(-2, 1.0 / 3.0, std::string("yz"));
    }
    std::ifstream in(p);
    std::stringstream got;
    got << in.rdbuf();
    const std::string expected =
        "a,b,c\n1,0.5,x\n-2," + format_double(1.0 / 3.0) + ",yz\n";
    CHECK(got.str() == expected);
    fs::remove(p);
}

// ============================================================================
// Counter-based RNG
// ============================================================================

TEST_CASE("counter_hash is a pure function with distinct streams") {
    CHECK(rng::counter_hash(42, 7) == rng::counter_hash(42, 7));
    CHECK(rng::counter_hash(42, 7) != rng::counter_hash(42, 8));
    CHECK(rng::counter_hash(42, 7) != rng::counter_hash(43, 7));
    // no collisions across a small scan (would break path independence)
    std::set<std::uint64_t> seen;
    for (std::uint64_t c = 0; c < 10000; ++c) seen.insert(rng::counter_hash(1, c));
    CHECK(seen.size() == 10000);
}

TEST_CASE("u01 stays in (0, 1]") {
    for (std::uint64_t c = 0; c < 5000; ++c) {
        double u = rng::u01(11, c);
        CHECK(u > 0.0);
        CHECK(u <= 1.0);
    }
}

TEST_CASE("normal variates match N(0,1) moments within Monte Carlo error") {
    const int n = 200000;
    double s1 = 0.0, s2 = 0.0, s4 = 0.0;
    for (int k = 0; k < n; ++k) {
        double z = rng::normal(2024, static_cast<std::uint64_t>(k));
        s1 += z;
        s2 += z * z;
        s4 += z * z * z * z;
    }
    const double mean = s1 / n, var = s2 / n, kurt = s4 / n;
    // standard errors: 1/sqrt(n) for the mean, sqrt(2/n) for the variance,
    // sqrt(96/n) for the fourth moment of a standard normal
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(kurt - 3.0) < 4.0 * std::sqrt(96.0 / n));
}

// ============================================================================
// Brownian paths
// ============================================================================

TEST_CASE("sample_brownian obeys its documented contract") {
    const std::uint64_t seed = 777;
    const double dt = 0.01;
    BrownianPath p = sample_brownian(seed, dt, 250);
    REQUIRE(p.increments.size() == 250);
    REQUIRE(p.cumulative.size() == 251);
    CHECK(p.cumulative.front() == 0.0);
    CHECK(p.t_end() == doctest::Approx(2.5));
    // increment k is sqrt(dt) * normal(seed, k), and cumulative sums them
    double run = 0.0;
    for (int k = 0; k < p.n_steps; ++k) {
        CHECK(p.increments[static_cast<std::size_t>(k)] ==
              std::sqrt(dt) * rng::normal(seed, static_cast<std::uint64_t>(k)));
        run += p.increments[static_cast<std::size_t>(k)];
        CHECK(p.cumulative[static_cast<std::size_t>(k) + 1] == doctest::Approx(run).epsilon(1e-14));
    }
    // reproducible, and distinct seeds give distinct paths
    BrownianPath q = sample_brownian(seed, dt, 250);
    CHECK(p.increments == q.increments);
    BrownianPath r = sample_brownian(seed + 1, dt, 250);
    CHECK(p.increments != r.increments);
}

TEST_CASE("brownian increments have the right scale") {
    // pooled variance over many short paths: Var[dB] = dt
    const double dt = 0.02;
    double s2 = 0.0;
    int n = 0;
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        BrownianPath p = sample_brownian(derive_path_seed(5150, seed), dt, 50);
        for (double db : p.increments) {
            s2 += db * db;
            ++n;
        }
    }
    const double var = s2 / n;
    CHECK(std::abs(var - dt) < 4.0 * dt * std::sqrt(2.0 / n));
}

TEST_CASE("zero_path is identically zero") {
    BrownianPath z = zero_path(0.1, 7);
    for (double db : z.increments) CHECK(db == 0.0);
    for (double b : z.cumulative) CHECK(b == 0.0);
}

TEST_CASE("derive_path_seed decorrelates path indices") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t p = 0; p < 2000; ++p) seen.insert(derive_path_seed(93111881, p));
    CHECK(seen.size() == 2000);
    CHECK(derive_path_seed(1, 0) != derive_path_seed(2, 0));
}

// ============================================================================
// Statistics helpers
// ============================================================================

TEST_CASE("mean, variance, se, median on hand-checked samples") {
    std::vector<double> xs = {1.0, 2.0, 3.0, 4.0};
    CHECK(mean(xs) == doctest::Approx(2.5));
    CHECK(sample_variance(xs) == doctest::Approx(5.0 / 3.0));
    CHECK(standard_error(xs) == doctest::Approx(std::sqrt(5.0 / 12.0)));
    CHECK(median(xs) == doctest::Approx(2.5));
    CHECK(median({3.0, 1.0, 2.0}) == doctest::Approx(2.0));
    CHECK_THROWS_AS(mean(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("fit_line recovers an exact affine relation") {
    std::vector<double> xs = {0.0, 1.0, 2.0, 3.0};
    std::vector<double> ys;
    for (double x : xs) ys.push_back(-2.0 * x + 0.75);
    LineFit f = fit_line(xs, ys);
    CHECK(f.slope == doctest::Approx(-2.0).epsilon(1e-13));
    CHECK(f.intercept == doctest::Approx(0.75).epsilon(1e-13));
}

TEST_CASE("fit_loglog_slope recovers the exponent of a pure power law") {
    std::vector<double> eps = {0.4, 0.2, 0.1, 0.05};
    std::vector<double> norms;
    for (double e : eps) norms.push_back(3.0 * std::pow(e, 1.7));
    CHECK(fit_loglog_slope(eps, norms) == doctest::Approx(1.7).epsilon(1e-12));
}

TEST_CASE("bootstrap_se is reproducible and vanishes for constant data") {
    std::vector<double> flat(50, 4.2);
    CHECK(bootstrap_se(flat, 100, 9) < 1e-12);  // round-off only
    std::vector<double> xs;
    for (int i = 0; i < 60; ++i) xs.push_back(rng::normal(31, static_cast<std::uint64_t>(i)));
    const double a = bootstrap_se(xs, 200, 17);
    const double b = bootstrap_se(xs, 200, 17);
    CHECK(a == b);
    CHECK(a > 0.0);
    // the bootstrap should land near the analytic standard error of the mean
    CHECK(a == doctest::Approx(standard_error(xs)).epsilon(0.35));
}
