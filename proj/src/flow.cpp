#include "sclaw/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "sclaw/rng.hpp"
#include "sclaw/stats.hpp"

namespace sclaw {

DriftSampler::DriftSampler(std::vector<ScalarField> snapshots)
    : snaps_(std::move(snapshots)) {
    if (snaps_.empty())
        throw std::invalid_argument("drift: need at least one snapshot");
    for (std::size_t j = 0; j < snaps_.size(); ++j) {
        require_finite(snaps_[j], "drift snapshot");
        if (j > 0) {
            require_same_grid(snaps_[j - 1], snaps_[j], "drift");
            if (!(snaps_[j].time > snaps_[j - 1].time))
                throw std::invalid_argument("drift: snapshot times must increase");
        }
        max_abs_value_ = std::max(max_abs_value_, linf_norm(snaps_[j]));
    }
}

int DriftSampler::index_at(double t) const {
    // Last snapshot with time <= t (piecewise-constant in time, left limit);
    // times before the first snapshot use the first.
    int lo = 0, hi = static_cast<int>(snaps_.size()) - 1;
    const double t_eff = t + 1e-12 * (1.0 + std::abs(t));
    if (t_eff <= snaps_[0].time) return 0;
    while (lo < hi) {
        int mid = (lo + hi + 1) / 2;
        if (snaps_[static_cast<std::size_t>(mid)].time <= t_eff)
            lo = mid;
        else
            hi = mid - 1;
    }
    return lo;
}

double DriftSampler::value(double t, double x) const {
    return value_at(snaps_[static_cast<std::size_t>(index_at(t))], x);
}

double DriftSampler::slope(double t, double x) const {
    const ScalarField& f = snaps_[static_cast<std::size_t>(index_at(t))];
    const Grid1D& g = f.grid;
    const int n = g.n_cells;
    const double first = g.center(0), last = g.center(n - 1);
    if (x <= first || x >= last) return 0.0;  // constant extension
    double s = (x - first) / g.dx();
    int i = static_cast<int>(s);
    if (i > n - 2) i = n - 2;
    return (f.values[static_cast<std::size_t>(i) + 1] -
            f.values[static_cast<std::size_t>(i)]) / g.dx();
}

namespace {

int locate_time(const std::vector<double>& times, double t, const char* what) {
    for (std::size_t j = 0; j < times.size(); ++j)
        if (std::abs(times[j] - t) <= 1e-9 * (1.0 + std::abs(t)))
            return static_cast<int>(j);
    throw std::invalid_argument(std::string(what) + ": time " + std::to_string(t) +
                                " was not recorded");
}

}  // namespace

int FlowRealization::time_index(double t) const { return locate_time(times, t, "flow"); }
int InverseFlow::time_index(double t) const { return locate_time(times, t, "inverse flow"); }

FlowRealization solve_flow_sde(const DriftSampler& drift,
                               const BrownianPath& path,
                               std::vector<double> start_points,
                               const FlowOptions& opt) {
    const int m = static_cast<int>(start_points.size());
    if (m < 1) throw std::invalid_argument("flow: no start points");
    for (int j = 1; j < m; ++j)
        if (!(start_points[static_cast<std::size_t>(j)] >
              start_points[static_cast<std::size_t>(j) - 1]))
            throw std::invalid_argument("flow: start points must be strictly increasing");
    if (opt.record_times.empty())
        throw std::invalid_argument("flow: no record times requested");

    // Map each record time onto the Brownian step grid.
    const double dt = path.dt;
    std::vector<int> record_step(opt.record_times.size());
    for (std::size_t r = 0; r < opt.record_times.size(); ++r) {
        double t = opt.record_times[r];
        int k = static_cast<int>(std::llround(t / dt));
        if (k < 0 || k > path.n_steps ||
            std::abs(k * dt - t) > 1e-9 * (1.0 + std::abs(t)))
            throw std::invalid_argument("flow: record time " + std::to_string(t) +
                                        " is not on the path's step grid");
        record_step[r] = k;
        if (r > 0 && record_step[r] <= record_step[r - 1])
            throw std::invalid_argument("flow: record times must increase");
    }

    FlowRealization out;
    out.start_points = start_points;
    out.times.reserve(opt.record_times.size());
    out.forward.reserve(opt.record_times.size());
    out.jacobian.reserve(opt.record_times.size());

    std::vector<double> x = start_points;
    std::vector<double> log_jac(static_cast<std::size_t>(m), 0.0);

    auto record = [&](double t) {
        // Monotonicity in the start point must survive discretization; an
        // actual inversion means the time step is too coarse for this drift.
        // Exact ties are tolerated: strongly compressive drift can contract
        // neighbouring trajectories below floating-point resolution, which is
        // a faithful outcome, not a crossing.
        for (int j = 1; j < m; ++j)
            if (x[static_cast<std::size_t>(j)] < x[static_cast<std::size_t>(j) - 1])
                throw std::runtime_error(
                    "flow: trajectories from x0=" +
                    std::to_string(start_points[static_cast<std::size_t>(j) - 1]) + " and x0=" +
                    std::to_string(start_points[static_cast<std::size_t>(j)]) +
                    " crossed by t=" + std::to_string(t));
        out.times.push_back(t);
        out.forward.push_back(x);
        std::vector<double> jac(static_cast<std::size_t>(m));
        for (int j = 0; j < m; ++j)
            jac[static_cast<std::size_t>(j)] = std::exp(log_jac[static_cast<std::size_t>(j)]);
        out.jacobian.push_back(std::move(jac));
    };

    std::size_t next_rec = 0;
    if (record_step[next_rec] == 0) {
        record(0.0);
        ++next_rec;
    }
    const int last_step = record_step.back();
    for (int k = 0; k < last_step; ++k) {
        const double t_k = k * dt;
        const double dB = path.increments[static_cast<std::size_t>(k)];
        for (int j = 0; j < m; ++j) {
            double& xj = x[static_cast<std::size_t>(j)];
            log_jac[static_cast<std::size_t>(j)] += drift.slope(t_k, xj) * dt;
            xj += drift.value(t_k, xj) * dt + dB;
            if (!(xj >= opt.exit_lo && xj <= opt.exit_hi))
                throw std::runtime_error(
                    "flow: trajectory from x0=" +
                    std::to_string(start_points[static_cast<std::size_t>(j)]) +
                    " left [" + std::to_string(opt.exit_lo) + ", " +
                    std::to_string(opt.exit_hi) + "] at t=" + std::to_string(t_k + dt) +
                    " (path seed " + std::to_string(path.seed) + ")");
        }
        // Order restoration at rounding scale.  Strong compression contracts
        // neighbouring trajectories to within an ulp, where the interpolated
        // drift is no longer monotone (its evaluation carries ~1 ulp of
        // rounding jitter) and a step can invert the pair by an ulp or two.
        // The exact flow of a Lipschitz drift never crosses, so such a pair
        // has truly merged at double resolution: collapse it to an exact tie.
        // Inversions beyond rounding scale mean the step is too coarse for
        // this drift and surface via the check in record().
        for (int j = 1; j < m; ++j) {
            double& a = x[static_cast<std::size_t>(j) - 1];
            double& b = x[static_cast<std::size_t>(j)];
            if (b < a && a - b <= 8.0 * std::numeric_limits<double>::epsilon() *
                                     (1.0 + std::abs(a)))
                b = a;
        }
        if (next_rec < record_step.size() && record_step[next_rec] == k + 1) {
            record((k + 1) * dt);
            ++next_rec;
        }
    }
    return out;
}

InverseFlow invert_flow(const FlowRealization& flow, std::vector<double> targets) {
    const std::size_t m = flow.start_points.size();
    if (m < 2) throw std::invalid_argument("invert_flow: need at least 2 start points");

    InverseFlow inv;
    inv.targets = std::move(targets);
    inv.times = flow.times;
    inv.psi.resize(flow.times.size());
    inv.inv_jacobian.resize(flow.times.size());
    inv.clamped.resize(flow.times.size());

    for (std::size_t r = 0; r < flow.times.size(); ++r) {
        const std::vector<double>& fx = flow.forward[r];
        const std::vector<double>& jac = flow.jacobian[r];
        auto& psi = inv.psi[r];
        auto& ijac = inv.inv_jacobian[r];
        auto& clm = inv.clamped[r];
        psi.resize(inv.targets.size());
        ijac.resize(inv.targets.size());
        clm.resize(inv.targets.size());

        for (std::size_t q = 0; q < inv.targets.size(); ++q) {
            const double y = inv.targets[q];
            if (y <= fx.front()) {
                psi[q] = flow.start_points.front();
                ijac[q] = 1.0 / jac.front();
                clm[q] = y < fx.front() ? 1 : 0;
                continue;
            }
            if (y >= fx.back()) {
                psi[q] = flow.start_points.back();
                ijac[q] = 1.0 / jac.back();
                clm[q] = y > fx.back() ? 1 : 0;
                continue;
            }
            // fx is non-decreasing (checked at record time); upper_bound puts
            // fx[j] <= y < fx[j+1], so the bracketing gap is always positive
            // even when other adjacent entries are tied.
            std::size_t j = static_cast<std::size_t>(
                std::upper_bound(fx.begin(), fx.end(), y) - fx.begin()) - 1;
            if (j > m - 2) j = m - 2;
            double w = (y - fx[j]) / (fx[j + 1] - fx[j]);
            psi[q] = flow.start_points[j] +
                     w * (flow.start_points[j + 1] - flow.start_points[j]);
            ijac[q] = 1.0 / ((1.0 - w) * jac[j] + w * jac[j + 1]);
            clm[q] = 0;
        }
    }
    return inv;
}

std::vector<std::vector<double>> jacobian_exponential(const DriftSampler& drift,
                                                      const BrownianPath& path,
                                                      const std::vector<double>& starts,
                                                      const std::vector<double>& record_times) {
    FlowOptions opt;
    opt.record_times = record_times;
    return solve_flow_sde(drift, path, starts, opt).jacobian;
}

std::vector<MartingaleSample> stochastic_exponential_mean(
    const DriftSampler& drift, std::uint64_t base_seed, int n_paths, double x0,
    double dt, const std::vector<double>& eval_times) {
    if (n_paths < 2) throw std::invalid_argument("martingale: need 2+ paths");
    if (eval_times.empty()) throw std::invalid_argument("martingale: no eval times");
    if (!(dt > 0.0)) throw std::invalid_argument("martingale: dt must be positive");

    std::vector<int> eval_step(eval_times.size());
    int n_steps = 0;
    for (std::size_t r = 0; r < eval_times.size(); ++r) {
        double t = eval_times[r];
        int k = static_cast<int>(std::llround(t / dt));
        if (k < 1 || std::abs(k * dt - t) > 1e-9 * (1.0 + std::abs(t)))
            throw std::invalid_argument("martingale: eval time " + std::to_string(t) +
                                        " is not on the step grid");
        eval_step[r] = k;
        n_steps = std::max(n_steps, k);
        if (r > 0 && eval_step[r] <= eval_step[r - 1])
            throw std::invalid_argument("martingale: eval times must increase");
    }

    // samples[r][p] = exponential for path p at eval time r.
    std::vector<std::vector<double>> samples(
        eval_times.size(), std::vector<double>(static_cast<std::size_t>(n_paths)));

    for (int p = 0; p < n_paths; ++p) {
        const std::uint64_t seed = derive_path_seed(base_seed, static_cast<std::uint64_t>(p));
        const double root_dt = std::sqrt(dt);
        double x = x0;
        double ito_sum = 0.0;     // sum v dB
        double quad_sum = 0.0;    // sum v^2 dt
        std::size_t next_eval = 0;
        for (int k = 0; k < n_steps; ++k) {
            double dB = root_dt * rng::normal(seed, static_cast<std::uint64_t>(k));
            double v = drift.value(k * dt, x);
            ito_sum += v * dB;
            quad_sum += v * v * dt;
            x += v * dt + dB;
            if (next_eval < eval_step.size() && eval_step[next_eval] == k + 1) {
                samples[next_eval][static_cast<std::size_t>(p)] =
                    std::exp(ito_sum - 0.5 * quad_sum);
                ++next_eval;
            }
        }
    }

    std::vector<MartingaleSample> out(eval_times.size());
    for (std::size_t r = 0; r < eval_times.size(); ++r) {
        out[r].t = eval_times[r];
        out[r].mean = mean(samples[r]);
        out[r].se = standard_error(samples[r]);
    }
    return out;
}

}  // namespace sclaw
