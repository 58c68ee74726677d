#include "nodal/verify.hpp"

#include <algorithm>
#include <cmath>

#include "nodal/errors.hpp"
#include "nodal/matcher.hpp"

namespace nodal {

namespace {

struct GridInfo {
    int n = 0;
    double dt = 0.0;
    double d = 0.0;
};

GridInfo check_grid(const NodalSolution& sol, const Profile& profile) {
    const auto& g = sol.grid;
    if (g.size() < 2001)
        throw ResolutionError("verification grid too coarse: need >= 2001 uniform points, got " +
                              std::to_string(g.size()));
    GridInfo info;
    info.n = static_cast<int>(g.size());
    info.d = profile.length();
    info.dt = info.d / (info.n - 1);
    for (size_t i = 1; i < g.size(); ++i)
        if (std::abs(g[i].t - g[i - 1].t - info.dt) > 1e-9 * info.d)
            throw ResolutionError("verification grid is not uniform");
    if (std::abs(g.front().t) > 1e-12 * info.d || std::abs(g.back().t - info.d) > 1e-9 * info.d)
        throw ResolutionError("verification grid does not span [0, d]");
    return info;
}

// Guard band indices: the FD stencil must stay clear of the series-extension
// regions and of the singular endpoints (width 2*delta plus the stencil).
std::pair<int, int> guard_indices(const NodalSolution& sol, const Profile& profile,
                                  const OdeParams& params, const GridInfo& info) {
    const double t0 = profile.sign_change();
    double delta_l = step_off_radius(sol.alpha, profile.exponent_left(), params, t0);
    double delta_r = step_off_radius(sol.beta_signed, profile.exponent_right(), params,
                                     info.d - t0);
    int lo = std::max(2, static_cast<int>(std::ceil(2.0 * delta_l / info.dt)) + 1);
    int hi = std::max(2, static_cast<int>(std::ceil(2.0 * delta_r / info.dt)) + 1);
    return {lo, info.n - 1 - hi};
}

}  // namespace

double residual_norm(const NodalSolution& sol, const Profile& profile, const OdeParams& params) {
    GridInfo info = check_grid(sol, profile);
    auto [i_lo, i_hi] = guard_indices(sol, profile, params, info);
    const auto& g = sol.grid;
    const double dt2 = info.dt * info.dt;
    double sup = 0.0;
    for (int i = i_lo; i <= i_hi; ++i) {
        double um2 = g[i - 2].u, um1 = g[i - 1].u, u0 = g[i].u, up1 = g[i + 1].u, up2 = g[i + 2].u;
        double d2 = (-um2 + 16.0 * um1 - 30.0 * u0 + 16.0 * up1 - up2) / (12.0 * dt2);
        double d1 = (um2 - 8.0 * um1 + 8.0 * up1 - up2) / (12.0 * info.dt);
        double res = d2 + profile.h(g[i].t) * d1 + reaction(u0, params);
        sup = std::max(sup, std::abs(res));
    }
    return sup;
}

VerificationReport verify_solution(const NodalSolution& sol, const Profile& profile,
                                   const OdeParams& params, const ToleranceSet& tols) {
    VerificationReport rep;
    rep.tolerances = tols;
    if (rep.tolerances.energy_slack <= 0.0) rep.tolerances.energy_slack = 1e2 * params.tol_abs;

    GridInfo info = check_grid(sol, profile);
    const auto& g = sol.grid;
    const double d = info.d;
    const double t0 = profile.sign_change();

    rep.residual_sup = residual_norm(sol, profile, params);
    rep.residual_ok = rep.residual_sup <= rep.tolerances.residual;

    // Seam: fresh shots from both endpoints, independent of how the grid was
    // produced.
    auto mm = mismatch(sol.alpha, sol.beta_signed, profile, params);
    rep.seam_jump_u = mm[0];
    rep.seam_jump_up = mm[1];
    rep.seam_ok = std::hypot(mm[0], mm[1]) <= rep.tolerances.seam;

    // Boundary condition via series consistency at the first interior points.
    const double H0 = profile.exponent_left();
    const double Hd = profile.exponent_right();
    double t1 = g[1].t;
    double pred_l = -reaction(g[0].u, params) * t1 / (H0 + 1.0);
    rep.boundary_left = g[1].up - pred_l;
    double s1 = d - g[info.n - 2].t;
    double pred_r = reaction(g[static_cast<size_t>(info.n) - 1].u, params) * s1 / (Hd + 1.0);
    rep.boundary_right = g[static_cast<size_t>(info.n) - 2].up - pred_r;
    rep.boundary_ok =
        std::abs(rep.boundary_left) <=
            rep.tolerances.boundary_abs + rep.tolerances.boundary_rel * std::abs(pred_l) &&
        std::abs(rep.boundary_right) <=
            rep.tolerances.boundary_abs + rep.tolerances.boundary_rel * std::abs(pred_r);

    // Zeros relocated from the stored grid alone.
    rep.zeros = locate_grid_zeros(g);
    rep.zero_count = static_cast<int>(rep.zeros.size());
    rep.zeros_ok = rep.zero_count == sol.k;
    rep.zeros_interior_ok = true;
    for (double z : rep.zeros)
        if (!(z > 1e-12 * d && z < d * (1.0 - 1e-12))) rep.zeros_interior_ok = false;

    // Energy direction law on increments fully inside [delta, t0] and
    // [t0, d - delta].
    double delta_l = step_off_radius(sol.alpha, H0, params, t0);
    double delta_r = step_off_radius(sol.beta_signed, Hd, params, d - t0);
    double viol = 0.0;
    double e_prev = energy(g[0].u, g[0].up, params);
    for (int i = 1; i < info.n; ++i) {
        double e = energy(g[i].u, g[i].up, params);
        double t_lo = g[i - 1].t, t_hi = g[i].t;
        if (t_lo >= delta_l && t_hi <= t0) viol = std::max(viol, e - e_prev);
        if (t_lo >= t0 && t_hi <= d - delta_r) viol = std::max(viol, e_prev - e);
        e_prev = e;
    }
    rep.energy_violation = viol;
    rep.energy_ok = rep.energy_violation <= rep.tolerances.energy_slack;

    rep.passed = rep.residual_ok && rep.seam_ok && rep.boundary_ok && rep.zeros_ok &&
                 rep.zeros_interior_ok && rep.energy_ok;
    return rep;
}

}  // namespace nodal
