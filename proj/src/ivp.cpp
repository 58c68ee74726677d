#include "nodal/ivp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nodal/errors.hpp"

namespace nodal {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense output weights (Hairer, Norsett & Wanner).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

struct Vec2 {
    double u, up;
};

struct DenseCoef {
    double t0 = 0.0, h = 0.0;
    Vec2 r1{}, r2{}, r3{}, r4{}, r5{};
    Vec2 at(double t) const {
        double th = (t - t0) / h;
        double th1 = 1.0 - th;
        Vec2 out;
        out.u = r1.u + th * (r2.u + th1 * (r3.u + th * (r4.u + th1 * r5.u)));
        out.up = r1.up + th * (r2.up + th1 * (r3.up + th * (r4.up + th1 * r5.up)));
        return out;
    }
};

class StepperCore {
public:
    StepperCore(const DriftFn& drift, const OdeParams& params)
        : drift_(drift), params_(params) {}

    Vec2 rhs(double t, const Vec2& y) const {
        return {y.up, -drift_(t) * y.up - reaction(y.u, params_)};
    }

    // One embedded step from (t, y) with k1 = f(t, y) already evaluated.
    // Returns the scaled error; fills ynew, k7 = f(t+h, ynew) and dense data.
    double step(double t, const Vec2& y, const Vec2& k1, double h, Vec2& ynew, Vec2& k7,
                DenseCoef& dense) const {
        Vec2 k2 = rhs(t + c2 * h, axpy(y, h, {a21 * k1.u, a21 * k1.up}));
        Vec2 k3 = rhs(t + c3 * h, axpy(y, h, comb({a31, a32}, {k1, k2})));
        Vec2 k4 = rhs(t + c4 * h, axpy(y, h, comb({a41, a42, a43}, {k1, k2, k3})));
        Vec2 k5 = rhs(t + c5 * h, axpy(y, h, comb({a51, a52, a53, a54}, {k1, k2, k3, k4})));
        Vec2 k6 = rhs(t + h, axpy(y, h, comb({a61, a62, a63, a64, a65}, {k1, k2, k3, k4, k5})));
        Vec2 inc = comb({b1, 0.0, b3, b4, b5, b6}, {k1, k2, k3, k4, k5, k6});
        ynew = axpy(y, h, inc);
        k7 = rhs(t + h, ynew);
        Vec2 ev = comb({e1, 0.0, e3, e4, e5, e6, e7}, {k1, k2, k3, k4, k5, k6, k7});

        double err = 0.0;
        const double sku = params_.tol_abs + params_.tol_rel * std::max(std::abs(y.u), std::abs(ynew.u));
        const double skp = params_.tol_abs + params_.tol_rel * std::max(std::abs(y.up), std::abs(ynew.up));
        double ru = h * ev.u / sku, rp = h * ev.up / skp;
        err = std::sqrt(0.5 * (ru * ru + rp * rp));

        Vec2 ydiff{ynew.u - y.u, ynew.up - y.up};
        Vec2 bspl{h * k1.u - ydiff.u, h * k1.up - ydiff.up};
        dense.t0 = t;
        dense.h = h;
        dense.r1 = y;
        dense.r2 = ydiff;
        dense.r3 = bspl;
        dense.r4 = {ydiff.u - h * k7.u - bspl.u, ydiff.up - h * k7.up - bspl.up};
        Vec2 dv = comb({d1, 0.0, d3, d4, d5, d6, d7}, {k1, k2, k3, k4, k5, k6, k7});
        dense.r5 = {h * dv.u, h * dv.up};
        return err;
    }

private:
    static Vec2 axpy(const Vec2& y, double h, const Vec2& v) {
        return {y.u + h * v.u, y.up + h * v.up};
    }
    static Vec2 comb(std::initializer_list<double> w, std::initializer_list<Vec2> ks) {
        Vec2 out{0.0, 0.0};
        auto it = ks.begin();
        for (double wi : w) {
            out.u += wi * it->u;
            out.up += wi * it->up;
            ++it;
        }
        return out;
    }

    const DriftFn& drift_;
    const OdeParams& params_;
};

// Bisection for u = 0 on the dense interpolant over [ta, tb].
double refine_zero(const DenseCoef& dense, double ta, double tb, double ua) {
    double lo = ta, hi = tb, flo = ua;
    for (int it = 0; it < 60 && hi - lo > 0.0; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = dense.at(mid).u;
        if (fm == 0.0) return mid;
        if ((flo < 0.0) != (fm < 0.0)) hi = mid;
        else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

void scan_step_zeros(const DenseCoef& dense, double t_from, double t_to,
                     std::vector<double>& zeros, double merge_tol) {
    // Subdivide the step so paired zeros inside one step are not missed.
    constexpr int kScan = 4;
    auto push = [&](double z) {
        if (zeros.empty() || std::abs(z - zeros.back()) > merge_tol) zeros.push_back(z);
    };
    double prev_t = t_from;
    double prev_u = dense.at(t_from).u;
    for (int i = 1; i <= kScan; ++i) {
        double t = t_from + (t_to - t_from) * static_cast<double>(i) / kScan;
        double u = dense.at(t).u;
        if (prev_u != 0.0) {
            if (u == 0.0) push(t);
            else if ((prev_u < 0.0) != (u < 0.0)) push(refine_zero(dense, prev_t, t, prev_u));
        }
        // prev_u == 0: either an identically zero arc or a crossing already
        // recorded when u first hit zero; nothing new to record.
        prev_t = t;
        prev_u = u;
    }
}

struct RunOptions {
    bool record = true;                    // samples / zeros / energy
    const double* sample_times = nullptr;  // forced exact landings (ascending)
    size_t n_samples = 0;
    std::vector<State>* sampled_out = nullptr;
};

Trajectory run(const DriftFn& drift, const State& start, double t_end, const OdeParams& params,
               const RunOptions& opts) {
    StepperCore core(drift, params);
    const double dir = t_end > start.t ? 1.0 : -1.0;
    const double scale = std::max({std::abs(start.t), std::abs(t_end), std::abs(t_end - start.t)});
    const double h_min = 1e3 * kEps * scale;

    Trajectory traj;
    double t = start.t;
    Vec2 y{start.u, start.up};
    auto last_state = [&]() { return LastState{t, y.u, y.up}; };

    if (opts.record) {
        traj.samples.push_back({t, y.u, y.up});
        traj.energy.push_back(energy(y.u, y.up, params));
    }
    if (t_end == start.t) {
        traj.terminal = {t, y.u, y.up};
        return traj;
    }

    const double merge_tol = std::max(params.tol_abs, 32.0 * kEps * scale);
    size_t next_sample = 0;
    Vec2 k1 = core.rhs(t, y);
    // First trial step: stay well inside the distance to the nearest endpoint
    // singularity, which is ~|t| when starting from a step-off state.
    double h = dir * std::min({std::abs(t_end - start.t), 0.25 * std::abs(start.t) + 1e-4 * scale});
    double facold = 1e-4;
    bool rejected_last = false;
    long n_steps = 0;

    while (dir * (t_end - t) > 0.0) {
        if (++n_steps > 5'000'000)
            throw IntegrationError("integration exceeded the step budget", last_state());
        if (std::abs(h) < h_min) throw StiffnessError("step size underflow", last_state());

        // Land exactly on the next forced output time; the controller's
        // preferred step survives the truncation.
        bool capped = false;
        double target = t_end;
        if (opts.sample_times && next_sample < opts.n_samples) target = opts.sample_times[next_sample];
        double h_try = h;
        if (dir * (t + h_try - target) >= 0.0) {
            h_try = target - t;
            capped = true;
        }

        Vec2 ynew, k7;
        DenseCoef dense;
        double err = core.step(t, y, k1, h_try, ynew, k7, dense);
        if (!std::isfinite(ynew.u) || !std::isfinite(ynew.up) || !std::isfinite(err))
            throw DivergenceError("non-finite state during integration", last_state());

        constexpr double beta = 0.04, expo1 = 0.2 - beta * 0.75, safe = 0.9;
        double fac11 = std::pow(std::max(err, 1e-32), expo1);
        double fac = fac11 / std::pow(facold, beta);
        fac = std::max(0.1, std::min(5.0, fac / safe));
        double hnew = h_try / fac;

        if (err <= 1.0) {
            facold = std::max(err, 1e-4);
            double t_new = capped ? target : t + h_try;
            if (opts.record) {
                scan_step_zeros(dense, t, t_new, traj.zeros, merge_tol);
                traj.samples.push_back({t_new, ynew.u, ynew.up});
                traj.energy.push_back(energy(ynew.u, ynew.up, params));
            }
            if (capped && opts.sample_times && next_sample < opts.n_samples &&
                target == opts.sample_times[next_sample]) {
                if (opts.sampled_out) opts.sampled_out->push_back({t_new, ynew.u, ynew.up});
                ++next_sample;
            }
            t = t_new;
            y = ynew;
            k1 = k7;
            if (!capped) {
                if (rejected_last) hnew = dir * std::min(std::abs(hnew), std::abs(h_try));
                h = hnew;
            }
            rejected_last = false;
        } else {
            h = h_try / std::min(10.0, fac11 / safe);
            rejected_last = true;
        }
    }
    traj.terminal = {t, y.u, y.up};
    return traj;
}

}  // namespace

void validate_params(const OdeParams& params) {
    std::ostringstream msg;
    if (!(params.lambda > 0.0)) msg << "lambda must be positive";
    else if (!(params.q > 1.0)) msg << "q must exceed 1";
    else if (!(params.tol_abs > 0.0) || !(params.tol_rel > 0.0)) msg << "tolerances must be positive";
    else if (params.delta < 0.0) msg << "delta must be nonnegative";
    else return;
    throw ConfigurationError("invalid ode params: " + msg.str());
}

double reaction(double u, const OdeParams& params) {
    if (u == 0.0) return 0.0;
    double pw = std::exp((params.q - 1.0) * std::log(std::abs(u)));
    return params.lambda * u * (pw - 1.0);
}

double energy(double u, double up, const OdeParams& params) {
    double qp = params.q + 1.0;
    return 0.5 * up * up + params.lambda * (std::pow(std::abs(u), qp) / qp - 0.5 * u * u);
}

double step_off_radius(double value, double drift_exponent, const OdeParams& params,
                       double t_limit) {
    (void)drift_exponent;
    const double g = reaction(value, params);
    const double scale2 = params.tol_rel * (1.0 + std::abs(value)) / (1.0 + std::abs(g));
    if (params.delta > 0.0) {
        if (params.delta >= t_limit)
            throw ConfigurationError("step-off radius delta >= distance to the matching point");
        if (params.delta * params.delta >= scale2)
            throw ConfigurationError(
                "step-off radius fails the series scale check delta^2 < tol_rel*(1+|a|)/(1+|g(a)|)");
        return params.delta;
    }
    double delta = std::min({t_limit / 100.0, std::pow(params.tol_abs, 0.25),
                             0.9 * std::sqrt(scale2)});
    return delta;
}

State step_off_left(double alpha, const Profile& profile, const OdeParams& params) {
    const double H0 = profile.exponent_left();
    const double t0 = profile.sign_change();
    const double delta = step_off_radius(alpha, H0, params, t0);
    const double g = reaction(alpha, params);
    return {delta, alpha - g * delta * delta / (2.0 * (H0 + 1.0)), -g * delta / (H0 + 1.0)};
}

State step_off_right(double beta, const Profile& profile, const OdeParams& params) {
    const double Hd = profile.exponent_right();
    const double d = profile.length();
    const double t0 = profile.sign_change();
    const double delta = step_off_radius(beta, Hd, params, d - t0);
    const double g = reaction(beta, params);
    return {d - delta, beta - g * delta * delta / (2.0 * (Hd + 1.0)), g * delta / (Hd + 1.0)};
}

Trajectory integrate(const State& start, double t_end, const Profile& profile,
                     const OdeParams& params, Direction direction) {
    const double d = profile.length();
    if (!(start.t > 0.0 && start.t < d) || !(t_end > 0.0 && t_end < d))
        throw ConfigurationError("integration span must stay strictly inside (0, d)");
    if ((direction == Direction::forward) != (t_end >= start.t))
        throw ConfigurationError("integration direction inconsistent with t_end");
    auto drift = [&profile](double t) { return profile.h(t); };
    return run(drift, start, t_end, params, RunOptions{});
}

Trajectory integrate(const State& start, double t_end, const Profile& profile,
                     const OdeParams& params) {
    return integrate(start, t_end, profile, params,
                     t_end >= start.t ? Direction::forward : Direction::backward);
}

Trajectory integrate_drift(const DriftFn& drift, const State& start, double t_end,
                           const OdeParams& params) {
    return run(drift, start, t_end, params, RunOptions{});
}

std::vector<State> integrate_sampled(const DriftFn& drift, const State& start,
                                     std::span<const double> times, const OdeParams& params) {
    std::vector<State> out;
    out.reserve(times.size());
    if (times.empty()) return out;
    double prev = start.t;
    for (double t : times) {
        if (!(t > prev)) throw ConfigurationError("sample times must be strictly ascending past start.t");
        prev = t;
    }
    RunOptions opts;
    opts.record = false;
    opts.sample_times = times.data();
    opts.n_samples = times.size();
    opts.sampled_out = &out;
    run(drift, start, times.back(), params, opts);
    return out;
}

int count_zeros(const Trajectory& traj, double a, double b) {
    int n = 0;
    for (double z : traj.zeros)
        if (z > a && z < b) ++n;
    return n;
}

namespace {

double hermite_u(const State& s0, const State& s1, double t) {
    double dt = s1.t - s0.t;
    double th = (t - s0.t) / dt;
    double h00 = (1.0 + 2.0 * th) * (1.0 - th) * (1.0 - th);
    double h10 = th * (1.0 - th) * (1.0 - th);
    double h01 = th * th * (3.0 - 2.0 * th);
    double h11 = th * th * (th - 1.0);
    return h00 * s0.u + h10 * dt * s0.up + h01 * s1.u + h11 * dt * s1.up;
}

}  // namespace

std::vector<double> locate_grid_zeros(std::span<const State> grid) {
    std::vector<double> zeros;
    if (grid.size() < 2) return zeros;
    double scale = 0.0;
    for (const State& s : grid) scale = std::max(scale, std::abs(s.u));
    if (scale == 0.0) return zeros;
    const double band = 1e-9 * scale;

    // Walk samples that are clearly off zero; a sign flip between consecutive
    // ones is a simple zero, possibly with a short on-zero cluster in between.
    ptrdiff_t last = -1;
    int last_sign = 0;
    for (size_t i = 0; i < grid.size(); ++i) {
        if (std::abs(grid[i].u) <= band) continue;
        int sign = grid[i].u > 0.0 ? 1 : -1;
        if (last >= 0 && sign != last_sign) {
            // Bracket [last, i]; bisect on the piecewise Hermite interpolant.
            size_t lo_cell = static_cast<size_t>(last);
            double lo = grid[lo_cell].t, hi = grid[i].t;
            double flo = grid[lo_cell].u;
            for (int it = 0; it < 60 && hi - lo > 0.0; ++it) {
                double mid = 0.5 * (lo + hi);
                size_t cell = lo_cell;
                while (cell + 2 < i + 1 && grid[cell + 1].t <= mid) ++cell;
                double fm = hermite_u(grid[cell], grid[cell + 1], mid);
                if (fm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if ((flo < 0.0) != (fm < 0.0)) hi = mid;
                else {
                    lo = mid;
                    flo = fm;
                }
            }
            zeros.push_back(0.5 * (lo + hi));
        }
        last = static_cast<ptrdiff_t>(i);
        last_sign = sign;
    }
    return zeros;
}

}  // namespace nodal
