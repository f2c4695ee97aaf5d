#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sclaw {

// ============================================================================
// Uniform 1-d finite-volume grid.
//
// Cells are indexed 0..n_cells-1.  Cell i spans [face(i), face(i+1)] and has
// its center at center(i).  All solvers in this project share this layout,
// and fields are only combined when their grids compare exactly equal.
// ============================================================================

struct Grid1D {
    double x_min = 0.0;
    double x_max = 1.0;
    int n_cells = 1;

    double dx() const { return (x_max - x_min) / n_cells; }
    double face(int i) const { return x_min + i * dx(); }
    double center(int i) const { return x_min + (i + 0.5) * dx(); }

    bool same_as(const Grid1D& o) const {
        return x_min == o.x_min && x_max == o.x_max && n_cells == o.n_cells;
    }
};

inline Grid1D make_grid(double x_min, double x_max, int n_cells) {
    if (!(x_min < x_max))
        throw std::invalid_argument("grid: x_min must be < x_max");
    if (n_cells < 2)
        throw std::invalid_argument("grid: need at least 2 cells");
    return Grid1D{x_min, x_max, n_cells};
}

// A scalar field on a Grid1D: one value per cell, tagged with the time it
// represents.  Values are cell averages for conserved quantities; smooth
// diagnostic fields use cell-center samples.  The distinction only matters
// at O(dx^2).
struct ScalarField {
    Grid1D grid;
    double time = 0.0;
    std::vector<double> values;
};

inline ScalarField make_field(const Grid1D& g, double time, double fill = 0.0) {
    ScalarField f;
    f.grid = g;
    f.time = time;
    f.values.assign(static_cast<std::size_t>(g.n_cells), fill);
    return f;
}

inline ScalarField sample_field(const Grid1D& g, double time,
                                const std::function<double(double)>& fn) {
    ScalarField f = make_field(g, time);
    for (int i = 0; i < g.n_cells; ++i) f.values[i] = fn(g.center(i));
    return f;
}

inline void require_same_grid(const ScalarField& a, const ScalarField& b,
                              const char* what) {
    if (!a.grid.same_as(b.grid))
        throw std::invalid_argument(std::string(what) + ": grids differ");
}

// Throws if any cell is non-finite; `what` names the offending field in the
// message so pipeline failures point at their source.
inline void require_finite(const ScalarField& f, const char* what) {
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        if (!std::isfinite(f.values[i]))
            throw std::runtime_error(std::string(what) + ": non-finite value in cell " +
                                     std::to_string(i) + " at t=" + std::to_string(f.time));
    }
}

inline double mass(const ScalarField& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    return s * f.grid.dx();
}

inline double l1_norm(const ScalarField& f) {
    double s = 0.0;
    for (double v : f.values) s += std::abs(v);
    return s * f.grid.dx();
}

inline double l2_norm_sq(const ScalarField& f) {
    double s = 0.0;
    for (double v : f.values) s += v * v;
    return s * f.grid.dx();
}

inline double l2_norm(const ScalarField& f) { return std::sqrt(l2_norm_sq(f)); }

inline double linf_norm(const ScalarField& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

inline double l1_distance(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a, b, "l1_distance");
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        s += std::abs(a.values[i] - b.values[i]);
    return s * a.grid.dx();
}

// Piecewise-linear interpolation between cell centers, constant extension
// beyond the first/last center.  This is the single interpolation rule used
// whenever a field is evaluated off-grid (drift sampling, initial data for
// characteristics, ...).
inline double value_at(const ScalarField& f, double x) {
    const Grid1D& g = f.grid;
    const int n = g.n_cells;
    const double first = g.center(0);
    if (x <= first) return f.values.front();
    const double last = g.center(n - 1);
    if (x >= last) return f.values.back();
    double s = (x - first) / g.dx();
    int i = static_cast<int>(s);
    if (i > n - 2) i = n - 2;
    double w = s - i;
    return (1.0 - w) * f.values[i] + w * f.values[i + 1];
}

}  // namespace sclaw
