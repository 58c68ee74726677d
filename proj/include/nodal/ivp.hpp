#pragma once

#include <functional>
#include <span>
#include <vector>

#include "nodal/profile.hpp"

namespace nodal {

// Parameters of the nonlinearity lambda*u*(|u|^{q-1} - 1) and of the
// integrator. delta = 0 selects the step-off radius automatically.
struct OdeParams {
    double lambda = 1.0;
    double q = 3.0;
    double tol_abs = 1e-12;
    double tol_rel = 1e-12;
    double delta = 0.0;
};

void validate_params(const OdeParams& params);

struct State {
    double t = 0.0;
    double u = 0.0;
    double up = 0.0;
};

// A densely sampled integrated arc with located zeros of u and the energy at
// each accepted step.
struct Trajectory {
    std::vector<State> samples;
    std::vector<double> zeros;
    std::vector<double> energy;
    State terminal;
};

enum class Direction { forward, backward };

// g(u) = lambda*u*(|u|^{q-1} - 1); odd, with zeros exactly at -1, 0, 1.
double reaction(double u, const OdeParams& params);

// Energy E = up^2/2 + lambda*(|u|^{q+1}/(q+1) - u^2/2), chosen so that
// dE/dt = -h(t)*u'(t)^2 along solutions.
double energy(double u, double up, const OdeParams& params);

// Step-off radius actually used for a shot with initial value `value` toward
// an endpoint with drift exponent H (n-m-1). Honors params.delta when set,
// provided it passes the series scale check; throws ConfigurationError
// otherwise.
double step_off_radius(double value, double drift_exponent, const OdeParams& params,
                       double t_limit);

// Second-order series step away from the left singular endpoint:
// u(delta) = alpha - g(alpha)*delta^2/(2*(H0+1)), u'(delta) = -g(alpha)*delta/(H0+1).
State step_off_left(double alpha, const Profile& profile, const OdeParams& params);

// Mirror image at the right endpoint; the reflection flips the sign of u'.
State step_off_right(double beta, const Profile& profile, const OdeParams& params);

// Adaptive embedded Runge-Kutta integration of u'' + h(t)u' + g(u) = 0 with
// dense-output zero location and per-step energy samples. start.t and t_end
// must lie strictly inside (0, d).
Trajectory integrate(const State& start, double t_end, const Profile& profile,
                     const OdeParams& params, Direction direction);
Trajectory integrate(const State& start, double t_end, const Profile& profile,
                     const OdeParams& params);

// Same integrator with an arbitrary drift coefficient; used for the reflected
// problem h*(s) = -h(d-s) when shooting from the right endpoint.
using DriftFn = std::function<double(double)>;
Trajectory integrate_drift(const DriftFn& drift, const State& start, double t_end,
                           const OdeParams& params);

// Error-controlled integration forced to land exactly on each requested time
// (ascending, all > start.t). Grid values are then direct integration results,
// not interpolants, which keeps finite differences of the exported grid clean.
std::vector<State> integrate_sampled(const DriftFn& drift, const State& start,
                                     std::span<const double> times, const OdeParams& params);

// Number of located zeros strictly inside (a, b).
int count_zeros(const Trajectory& traj, double a, double b);

// Zeros of a sampled grid: sign-change scan with clustering of samples that
// sit numerically on zero, refined by cubic Hermite root finding.
std::vector<double> locate_grid_zeros(std::span<const State> grid);

}  // namespace nodal
