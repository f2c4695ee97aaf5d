#include "sclaw/mollify.hpp"

#include "sclaw/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sclaw {

namespace {

// Normalized mother kernel on (-1, 1).
double mother(double s) {
    double d = 1.0 - s * s;
    if (d <= 1e-12) return 0.0;
    return std::exp(-1.0 / d) / kBumpIntegral;
}

// 8-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGaussX[8] = {-0.9602898564975363, -0.7966664774136267,
                               -0.5255324099163290, -0.1834346424956498,
                               0.1834346424956498,  0.5255324099163290,
                               0.7966664774136267,  0.9602898564975363};
constexpr double kGaussW[8] = {0.1012285362903763, 0.2223810344533745,
                               0.3137066458778873, 0.3626837833783620,
                               0.3626837833783620, 0.3137066458778873,
                               0.2223810344533745, 0.1012285362903763};

}  // namespace

double Mollifier::operator()(double x) const {
    return mother(x / epsilon) / epsilon;
}

int Mollifier::half_width(double dx) const {
    // Last cell whose interval [(m-1/2)dx, (m+1/2)dx] meets (-eps, eps).
    int h = static_cast<int>(std::ceil(epsilon / dx + 0.5)) - 1;
    return std::max(h, 1);
}

std::vector<double> Mollifier::cell_weights(double dx) const {
    const int h = half_width(dx);
    std::vector<double> w(static_cast<std::size_t>(2 * h + 1), 0.0);
    for (int m = -h; m <= h; ++m) {
        double a = (m - 0.5) * dx, b = (m + 0.5) * dx;
        double s = 0.0;
        for (int k = 0; k < 8; ++k) {
            double x = 0.5 * (a + b) + 0.5 * (b - a) * kGaussX[k];
            s += kGaussW[k] * (*this)(x);
        }
        w[static_cast<std::size_t>(m + h)] = s * 0.5 * (b - a);
    }
    // Enforce evenness, then renormalize to unit sum: the kernel integrates
    // to 1 analytically, and convexity of the weights is what the maximum
    // principle of mollification rests on.
    for (int m = 1; m <= h; ++m) {
        double avg = 0.5 * (w[static_cast<std::size_t>(h + m)] +
                            w[static_cast<std::size_t>(h - m)]);
        w[static_cast<std::size_t>(h + m)] = avg;
        w[static_cast<std::size_t>(h - m)] = avg;
    }
    double sum = 0.0;
    for (double x : w) sum += x;
    if (!(sum > 0.0)) throw std::runtime_error("mollifier: degenerate weights");
    for (double& x : w) x /= sum;
    return w;
}

Mollifier bump_mollifier(double epsilon) {
    if (!(epsilon > 0.0))
        throw std::invalid_argument("mollifier: epsilon must be positive");
    return Mollifier{epsilon};
}

ScalarField mollify(const ScalarField& field, const Mollifier& moll) {
    const Grid1D& g = field.grid;
    const double dx = g.dx();
    if (moll.epsilon < dx * (1.0 - 1e-12))
        throw std::invalid_argument("mollify: epsilon " + std::to_string(moll.epsilon) +
                                    " is below the cell size " + std::to_string(dx));
    const std::vector<double> w = moll.cell_weights(dx);
    const int h = (static_cast<int>(w.size()) - 1) / 2;
    const int n = g.n_cells;

    ScalarField out = make_field(g, field.time);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int m = -h; m <= h; ++m) {
            int j = std::clamp(i - m, 0, n - 1);  // edge-value extension
            s += w[static_cast<std::size_t>(m + h)] * field.values[static_cast<std::size_t>(j)];
        }
        out.values[static_cast<std::size_t>(i)] = s;
    }
    return out;
}

PrimitiveField primitive(const ScalarField& u) {
    const double dx = u.grid.dx();
    PrimitiveField p;
    p.grid = u.grid;
    p.time = u.time;
    p.values.resize(u.values.size());
    // Midpoint cumulative: V at center i integrates the piecewise-constant
    // density exactly through half of cell i.
    double acc = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        p.values[i] = acc + 0.5 * u.values[i] * dx;
        acc += u.values[i] * dx;
    }
    p.integrand = u;
    return p;
}

std::vector<double> face_primitive(const ScalarField& u) {
    const double dx = u.grid.dx();
    std::vector<double> cum(u.values.size() + 1);
    cum[0] = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i)
        cum[i + 1] = cum[i] + u.values[i] * dx;
    return cum;
}

double eval_face_primitive(const Grid1D& g, const std::vector<double>& face_cum,
                           double y) {
    const int n = g.n_cells;
    if (face_cum.size() != static_cast<std::size_t>(n) + 1)
        throw std::invalid_argument("eval_face_primitive: table/grid mismatch");
    const double dx = g.dx();
    double s = (y - g.x_min) / dx;
    if (s <= 0.0) {
        // Linear extension with the first cell's density.
        double slope = (face_cum[1] - face_cum[0]) / dx;
        return face_cum[0] + slope * (y - g.x_min);
    }
    if (s >= n) {
        double slope = (face_cum[static_cast<std::size_t>(n)] -
                        face_cum[static_cast<std::size_t>(n) - 1]) / dx;
        return face_cum[static_cast<std::size_t>(n)] + slope * (y - g.x_max);
    }
    int i = static_cast<int>(s);
    if (i > n - 1) i = n - 1;
    double w = s - i;
    return (1.0 - w) * face_cum[static_cast<std::size_t>(i)] +
           w * face_cum[static_cast<std::size_t>(i) + 1];
}

ScalarField commutator(const PrimitiveField& V, const ScalarField& v,
                       const Mollifier& moll) {
    if (!V.grid.same_as(v.grid))
        throw std::invalid_argument("commutator: grids differ");
    const Grid1D& g = V.grid;
    const int n = g.n_cells;
    const double dx = g.dx();

    // dV/dx: stored integrand when available, centered differences otherwise.
    ScalarField du;
    if (V.integrand) {
        du = *V.integrand;
    } else {
        du = make_field(g, V.time);
        for (int i = 0; i < n; ++i) {
            int lo = std::max(i - 1, 0), hi = std::min(i + 1, n - 1);
            du.values[static_cast<std::size_t>(i)] =
                (V.values[static_cast<std::size_t>(hi)] -
                 V.values[static_cast<std::size_t>(lo)]) /
                ((hi - lo) * dx);
        }
    }

    ScalarField prod = make_field(g, v.time);
    for (int i = 0; i < n; ++i)
        prod.values[static_cast<std::size_t>(i)] =
            v.values[static_cast<std::size_t>(i)] * du.values[static_cast<std::size_t>(i)];

    // d/dx(V_eps) = (dV/dx)_eps: differentiation commutes with convolution,
    // so the smoothed derivative is evaluated without finite differencing.
    ScalarField v_eps = mollify(v, moll);
    ScalarField du_eps = mollify(du, moll);
    ScalarField prod_eps = mollify(prod, moll);

    ScalarField r = make_field(g, v.time);
    for (int i = 0; i < n; ++i)
        r.values[static_cast<std::size_t>(i)] =
            v_eps.values[static_cast<std::size_t>(i)] * du_eps.values[static_cast<std::size_t>(i)] -
            prod_eps.values[static_cast<std::size_t>(i)];
    return r;
}

DecayTable commutator_l2_decay(const std::vector<ScalarField>& v_snaps,
                               const std::vector<ScalarField>& u_snaps,
                               const std::vector<double>& epsilons) {
    if (v_snaps.empty() || v_snaps.size() != u_snaps.size())
        throw std::invalid_argument("commutator_l2_decay: snapshot series mismatch");
    if (epsilons.empty())
        throw std::invalid_argument("commutator_l2_decay: empty ladder");
    for (std::size_t j = 0; j < v_snaps.size(); ++j) {
        require_same_grid(v_snaps[j], u_snaps[j], "commutator_l2_decay");
        if (std::abs(v_snaps[j].time - u_snaps[j].time) >
            1e-9 * (1.0 + std::abs(v_snaps[j].time)))
            throw std::invalid_argument("commutator_l2_decay: snapshot times differ");
    }

    DecayTable table;
    for (double eps : epsilons) {
        Mollifier moll = bump_mollifier(eps);
        // Space-time L2: trapezoid over snapshot times of the spatial L2^2.
        std::vector<double> sq(v_snaps.size());
        for (std::size_t j = 0; j < v_snaps.size(); ++j) {
            PrimitiveField V = primitive(u_snaps[j]);
            sq[j] = l2_norm_sq(commutator(V, v_snaps[j], moll));
        }
        double total = 0.0;
        if (v_snaps.size() == 1) {
            total = sq[0];
        } else {
            for (std::size_t j = 1; j < v_snaps.size(); ++j)
                total += 0.5 * (sq[j - 1] + sq[j]) *
                         (v_snaps[j].time - v_snaps[j - 1].time);
        }
        table.points.push_back({eps, std::sqrt(total)});
    }

    double peak = 0.0;
    for (const DecayPoint& p : table.points) peak = std::max(peak, p.l2_norm);
    if (peak <= 1e-13) {
        table.exact = true;  // commutator vanishes identically (constant drift)
        return table;
    }
    if (table.points.size() >= 2) {
        std::vector<double> eps(table.points.size()), norms(table.points.size());
        bool positive = true;
        for (std::size_t i = 0; i < table.points.size(); ++i) {
            eps[i] = table.points[i].epsilon;
            norms[i] = table.points[i].l2_norm;
            positive = positive && norms[i] > 0.0;
        }
        if (positive) table.slope = fit_loglog_slope(eps, norms);
    }
    return table;
}

}  // namespace sclaw
