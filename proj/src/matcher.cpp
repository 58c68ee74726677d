#include "nodal/matcher.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>

#include "nodal/errors.hpp"
#include "nodal/verify.hpp"

namespace nodal {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Quintic smoothstep: C2, S(0)=0, S(1/2)=1/2, S(1)=1.
double smoothstep5(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

double smoothstep5_deriv(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    double y = x * (1.0 - x);
    return 30.0 * y * y;
}

struct Shot2 {
    double u, up;
};

Shot2 left_at_t0(double alpha, const Profile& profile, const OdeParams& params) {
    ShotPoint p = shoot_left(alpha, profile, params);
    return {p.u_t0, p.up_t0};
}

Shot2 right_at_t0(double beta_signed, const Profile& profile, const OdeParams& params) {
    ShotPoint p = shoot_right(beta_signed, profile, params);
    return {p.u_t0, p.up_t0};
}

struct Seed {
    double alpha;
    double beta;  // positive; the parity sign is applied at refinement time
};

// Linear interpolation of the param where the polyline angle crosses target;
// returns the crossing with the largest param, if any.
std::optional<std::pair<double, double>> invert_angle(const std::vector<AngleKnot>& ks,
                                                      double target, double p_floor) {
    for (size_t i = ks.size(); i-- > 1;) {
        if (ks[i - 1].param < p_floor) break;
        double g0 = ks[i - 1].angle - target;
        double g1 = ks[i].angle - target;
        if (g0 * g1 > 0.0) continue;
        double w = g0 == g1 ? 0.5 : g0 / (g0 - g1);
        double p = ks[i - 1].param + w * (ks[i].param - ks[i - 1].param);
        double r = ks[i - 1].radius + w * (ks[i].radius - ks[i - 1].radius);
        return std::make_pair(p, r);
    }
    return std::nullopt;
}

// Radius-gap sign changes along the left curve at angle-matched right params.
std::vector<Seed> seeds_from_gap_scan(const AngleCurve& left, const AngleCurve& right, int k,
                                      double alpha_min, double beta_min) {
    std::vector<Seed> seeds;
    bool have_prev = false;
    double prev_alpha = 0.0, prev_gap = 0.0, prev_beta = 0.0;
    for (const AngleKnot& kn : left.knots) {
        if (kn.param < alpha_min) continue;
        double target = kn.angle + k * kPi;
        auto hit = invert_angle(right.knots, target, beta_min);
        if (!hit) {
            have_prev = false;
            continue;
        }
        double gap = kn.radius - hit->second;
        if (have_prev && prev_gap * gap <= 0.0 && (prev_gap != 0.0 || gap != 0.0)) {
            double w = prev_gap == gap ? 0.5 : prev_gap / (prev_gap - gap);
            seeds.push_back({prev_alpha + w * (kn.param - prev_alpha),
                             prev_beta + w * (hit->first - prev_beta)});
        }
        have_prev = true;
        prev_alpha = kn.param;
        prev_gap = gap;
        prev_beta = hit->first;
    }
    return seeds;
}

// Intersections of the shifted left curve (angle + k*pi, radius) with the
// right curve (angle, radius), both as polylines in the angle-radius plane.
std::vector<Seed> seeds_from_intersections(const AngleCurve& left, const AngleCurve& right, int k,
                                           double alpha_min, double beta_min) {
    std::vector<Seed> seeds;
    const double shift = k * kPi;
    for (size_t i = 0; i + 1 < left.knots.size(); ++i) {
        const AngleKnot& l0 = left.knots[i];
        const AngleKnot& l1 = left.knots[i + 1];
        if (l1.param < alpha_min) continue;
        double ax0 = l0.angle + shift, ax1 = l1.angle + shift;
        double alox = std::min(ax0, ax1), ahix = std::max(ax0, ax1);
        for (size_t j = 0; j + 1 < right.knots.size(); ++j) {
            const AngleKnot& r0 = right.knots[j];
            const AngleKnot& r1 = right.knots[j + 1];
            if (r1.param < beta_min) continue;
            if (std::max(r0.angle, r1.angle) < alox || std::min(r0.angle, r1.angle) > ahix)
                continue;
            double d1x = ax1 - ax0, d1y = l1.radius - l0.radius;
            double d2x = r1.angle - r0.angle, d2y = r1.radius - r0.radius;
            double den = d1x * d2y - d1y * d2x;
            if (den == 0.0) continue;
            double rx = r0.angle - ax0, ry = r0.radius - l0.radius;
            double t = (rx * d2y - ry * d2x) / den;
            double s = (rx * d1y - ry * d1x) / den;
            if (t < 0.0 || t > 1.0 || s < 0.0 || s > 1.0) continue;
            seeds.push_back({l0.param + t * (l1.param - l0.param),
                             r0.param + s * (r1.param - r0.param)});
        }
    }
    return seeds;
}

struct RefinedRoot {
    double alpha = 0.0;
    double beta_signed = 0.0;
    double residual = 0.0;
};

std::optional<RefinedRoot> refine_root(double alpha0, double beta_signed0,
                                       const MatchProblem& problem) {
    const Profile& profile = problem.profile;
    const OdeParams& params = problem.params;
    const double beta_sign = beta_signed0 < 0.0 ? -1.0 : 1.0;

    double a = std::max(alpha0, problem.alpha_min);
    double b = beta_sign * std::max(std::abs(beta_signed0), problem.beta_min);

    Shot2 il = left_at_t0(a, profile, params);
    Shot2 fr = right_at_t0(b, profile, params);
    double ru = il.u - fr.u, rp = il.up - fr.up;
    double nr = std::hypot(ru, rp);
    double best_a = a, best_b = b, best_nr = nr;

    const double floor_tol = 1e-13 * (1.0 + std::abs(a) + std::abs(b));
    for (int it = 0; it < 40 && nr > floor_tol; ++it) {
        double da = 1e-7 * std::max(std::abs(a), 1.0);
        double db = 1e-7 * std::max(std::abs(b), 1.0);
        Shot2 ila = left_at_t0(a + da, profile, params);
        Shot2 frb = right_at_t0(b + db, profile, params);
        double j11 = (ila.u - il.u) / da, j21 = (ila.up - il.up) / da;
        double j12 = -(frb.u - fr.u) / db, j22 = -(frb.up - fr.up) / db;
        double det = j11 * j22 - j12 * j21;
        if (det == 0.0 || !std::isfinite(det)) break;
        double step_a = (-ru * j22 + rp * j12) / det;
        double step_b = (-rp * j11 + ru * j21) / det;

        bool moved = false;
        double scale = 1.0;
        for (int ls = 0; ls < 12; ++ls, scale *= 0.5) {
            double an = std::max(a + scale * step_a, problem.alpha_min);
            double bn = beta_sign * std::max(std::abs(b + scale * step_b), problem.beta_min);
            if (an == a && bn == b) continue;
            Shot2 iln = left_at_t0(an, profile, params);
            Shot2 frn = right_at_t0(bn, profile, params);
            double run = iln.u - frn.u, rpn = iln.up - frn.up;
            double nrn = std::hypot(run, rpn);
            if (nrn < nr) {
                a = an;
                b = bn;
                il = iln;
                fr = frn;
                ru = run;
                rp = rpn;
                nr = nrn;
                moved = true;
                break;
            }
        }
        if (nr < best_nr) {
            best_a = a;
            best_b = b;
            best_nr = nr;
        }
        if (!moved) break;  // stalled at the shot noise floor
    }
    if (nr < best_nr) {
        best_a = a;
        best_b = b;
        best_nr = nr;
    }
    const double match_tol = problem.match_tol_scale * (1.0 + std::abs(best_a));
    if (best_nr <= match_tol) return RefinedRoot{best_a, best_b, best_nr};
    return std::nullopt;
}

}  // namespace

std::array<double, 2> mismatch(double alpha, double beta_signed, const Profile& profile,
                               const OdeParams& params) {
    Shot2 il = left_at_t0(alpha, profile, params);
    Shot2 fr = right_at_t0(beta_signed, profile, params);
    return {il.u - fr.u, il.up - fr.up};
}

NodalSolution assemble(double alpha, double beta_signed, const Profile& profile,
                       const OdeParams& params, const AssembleOptions& opts) {
    if (opts.grid_points < 2) throw ConfigurationError("assemble requires >= 2 grid points");
    const double d = profile.length();
    const double t0 = profile.sign_change();
    const double H0 = profile.exponent_left();
    const double Hd = profile.exponent_right();
    const int n = opts.grid_points;
    const double dt = d / (n - 1);

    const double delta_l = step_off_radius(alpha, H0, params, t0);
    const double delta_r = step_off_radius(beta_signed, Hd, params, d - t0);
    const double g_l = reaction(alpha, params);
    const double g_r = reaction(beta_signed, params);

    double w_max = std::min(t0 - delta_l, (d - delta_r) - t0);
    double blend_w = std::min(opts.blend_frac * w_max, 0.45 * w_max);
    blend_w = std::max(blend_w, std::min(4.0 * dt, 0.45 * w_max));

    auto grid_t = [&](int i) { return d * static_cast<double>(i) / (n - 1); };

    // Left arc: exact landings on every grid point in (delta_l, t0 + W], plus
    // t0 itself for the seam measurement.
    std::vector<double> left_times;
    bool t0_on_grid = false;
    for (int i = 1; i < n - 1; ++i) {
        double t = grid_t(i);
        if (t <= delta_l || t > t0 + blend_w) continue;
        if (!t0_on_grid && t == t0) t0_on_grid = true;
        if (!t0_on_grid && t > t0 && (left_times.empty() || left_times.back() < t0))
            left_times.push_back(t0);
        left_times.push_back(t);
    }
    if (left_times.empty() || (left_times.back() < t0 && !t0_on_grid)) left_times.push_back(t0);
    State start_l = step_off_left(alpha, profile, params);
    DriftFn drift_l = [&profile](double t) { return profile.h(t); };
    std::vector<State> left_states = integrate_sampled(drift_l, start_l, left_times, params);

    // Right arc in reflected coordinates s = d - t.
    std::vector<double> right_s;
    const double s0 = d - t0;
    bool s0_on_grid = false;
    for (int i = n - 2; i >= 1; --i) {
        double s = d - grid_t(i);
        if (s <= delta_r || s > s0 + blend_w) continue;
        if (!s0_on_grid && s == s0) s0_on_grid = true;
        if (!s0_on_grid && s > s0 && (right_s.empty() || right_s.back() < s0))
            right_s.push_back(s0);
        right_s.push_back(s);
    }
    if (right_s.empty() || (right_s.back() < s0 && !s0_on_grid)) right_s.push_back(s0);
    State at_d = step_off_right(beta_signed, profile, params);
    State start_r = {d - at_d.t, at_d.u, -at_d.up};
    DriftFn drift_r = [&profile, d](double s) { return -profile.h(d - s); };
    std::vector<State> right_states = integrate_sampled(drift_r, start_r, right_s, params);

    // Index the sampled values by time for assembly.
    auto find_state = [](const std::vector<State>& states, double t) -> const State* {
        auto it = std::lower_bound(states.begin(), states.end(), t,
                                   [](const State& s, double v) { return s.t < v; });
        if (it != states.end() && it->t == t) return &*it;
        return nullptr;
    };

    // Seam jump from the two arcs at t0.
    const State* l_t0 = find_state(left_states, t0);
    const State* r_s0 = find_state(right_states, s0);
    if (!l_t0 || !r_s0) throw AssemblyError("internal: matching-point samples missing");
    double seam_u = l_t0->u - r_s0->u;
    double seam_up = l_t0->up - (-r_s0->up);
    double seam_tol = 2.0 * 1e-9 * (1.0 + std::abs(alpha));
    if (std::hypot(seam_u, seam_up) > seam_tol)
        throw AssemblyError("seam jump " + std::to_string(std::hypot(seam_u, seam_up)) +
                            " above the match tolerance at t0");

    NodalSolution sol;
    sol.alpha = alpha;
    sol.beta_signed = beta_signed;
    sol.seam_jump_u = seam_u;
    sol.seam_jump_up = seam_up;
    sol.grid.resize(n);
    for (int i = 0; i < n; ++i) {
        double t = grid_t(i);
        State out{t, 0.0, 0.0};
        if (t <= delta_l) {
            out.u = alpha - g_l * t * t / (2.0 * (H0 + 1.0));
            out.up = -g_l * t / (H0 + 1.0);
        } else if (t >= d - delta_r) {
            double s = d - t;
            out.u = beta_signed - g_r * s * s / (2.0 * (Hd + 1.0));
            out.up = g_r * s / (Hd + 1.0);
        } else if (t < t0 - blend_w) {
            const State* s = find_state(left_states, t);
            if (!s) throw AssemblyError("internal: left sample missing");
            out.u = s->u;
            out.up = s->up;
        } else if (t > t0 + blend_w) {
            const State* s = find_state(right_states, d - t);
            if (!s) throw AssemblyError("internal: right sample missing");
            out.u = s->u;
            out.up = -s->up;
        } else {
            const State* sl = find_state(left_states, t);
            const State* sr = find_state(right_states, d - t);
            if (!sl || !sr) throw AssemblyError("internal: blend sample missing");
            double x = (t - (t0 - blend_w)) / (2.0 * blend_w);
            double w = 1.0 - smoothstep5(x);
            double wp = -smoothstep5_deriv(x) / (2.0 * blend_w);
            double ur = sr->u, upr = -sr->up;
            out.u = w * sl->u + (1.0 - w) * ur;
            out.up = w * sl->up + (1.0 - w) * upr + wp * (sl->u - ur);
        }
        sol.grid[static_cast<size_t>(i)] = out;
    }
    sol.zeros = locate_grid_zeros(sol.grid);
    sol.k = static_cast<int>(sol.zeros.size());
    return sol;
}

struct Matcher::Impl {
    Profile profile;
    OdeParams params;
    SweepOptions sweep_opts;
    std::optional<AngleSweeper> left;
    std::optional<AngleSweeper> right;
    AngleCurve left_cache;
    AngleCurve right_cache;
    double left_target = 0.0;
    double right_target = 0.0;

    Impl(Profile p, OdeParams par, SweepOptions so)
        : profile(std::move(p)), params(par), sweep_opts(so) {}

    const AngleCurve& left_curve(double target) {
        if (!left) left.emplace(Side::left, profile, params, sweep_opts);
        if (target > left_target || left_cache.knots.empty()) {
            left->extend_to_angle(target);
            left_cache = left->curve();
            left_target = target;
        }
        return left_cache;
    }

    const AngleCurve& right_curve(double target) {
        if (!right) right.emplace(Side::right, profile, params, sweep_opts);
        if (target > right_target || right_cache.knots.empty()) {
            right->extend_to_angle(target);
            right_cache = right->curve();
            right_target = target;
        }
        return right_cache;
    }
};

Matcher::Matcher(Profile profile, OdeParams params, SweepOptions sweep_opts)
    : impl_(std::make_unique<Impl>(std::move(profile), params, sweep_opts)) {
    validate_params(params);
}

Matcher::~Matcher() = default;
Matcher::Matcher(Matcher&&) noexcept = default;
Matcher& Matcher::operator=(Matcher&&) noexcept = default;

std::array<double, 2> Matcher::mismatch(double alpha, double beta_signed) const {
    return nodal::mismatch(alpha, beta_signed, impl_->profile, impl_->params);
}

const AngleCurve& Matcher::left_curve(double target_abs_angle) {
    return impl_->left_curve(target_abs_angle);
}

const AngleCurve& Matcher::right_curve(double target_abs_angle) {
    return impl_->right_curve(target_abs_angle);
}

std::vector<NodalSolution> Matcher::find_all(const MatchProblem& problem,
                                             const AssembleOptions& opts) {
    const Profile& profile = impl_->profile;
    const OdeParams& params = impl_->params;
    const ProfileSpec& spec = profile.spec();
    if (problem.k < 0) throw ConfigurationError("target zero count k must be >= 0");

    ExponentReport gate = check_exponent(spec.n, spec.m1, spec.m2, params.q);
    if (!gate.passed) {
        std::ostringstream msg;
        msg << "exponent gate failed: q = " << params.q << " is not below p_G = " << gate.p_gate
            << " (m = " << gate.m << ")";
        throw PreconditionError(msg.str(), gate.p_gate);
    }

    const double target = (problem.k + 1) * kPi;
    const AngleCurve& left = impl_->left_curve(target);
    const AngleCurve& right = impl_->right_curve(target);

    std::vector<Seed> seeds;
    if (problem.k == 0) seeds.push_back({1.0, 1.0});
    auto gap_seeds = seeds_from_gap_scan(left, right, problem.k, problem.alpha_min,
                                         problem.beta_min);
    auto xsec_seeds = seeds_from_intersections(left, right, problem.k, problem.alpha_min,
                                               problem.beta_min);
    auto add_unique = [&seeds](const Seed& s) {
        for (const Seed& have : seeds)
            if (std::abs(have.alpha - s.alpha) <= 1e-3 * (1.0 + std::abs(s.alpha)) &&
                std::abs(have.beta - s.beta) <= 1e-3 * (1.0 + std::abs(s.beta)))
                return;
        seeds.push_back(s);
    };
    for (const Seed& s : gap_seeds) add_unique(s);
    for (const Seed& s : xsec_seeds) add_unique(s);
    if (seeds.size() > static_cast<size_t>(problem.max_seeds))
        seeds.resize(static_cast<size_t>(problem.max_seeds));

    const double beta_sign = problem.k % 2 == 1 ? -1.0 : 1.0;
    MatchProblem local = problem;
    local.profile = profile;
    local.params = params;

    std::vector<std::optional<RefinedRoot>> refined(seeds.size());
    auto refine_one = [&](size_t i) {
        refined[i] = refine_root(seeds[i].alpha, beta_sign * seeds[i].beta, local);
    };

    std::vector<NodalSolution> accepted;
    double nearest = std::numeric_limits<double>::infinity();
    auto consider = [&](size_t i) {
        if (!refined[i]) return false;
        nearest = std::min(nearest, refined[i]->residual);
        NodalSolution sol;
        try {
            sol = assemble(refined[i]->alpha, refined[i]->beta_signed, profile, params, opts);
        } catch (const AssemblyError&) {
            return false;
        }
        if (sol.k != problem.k) return false;
        for (const NodalSolution& have : accepted)
            if (std::abs(have.alpha - sol.alpha) <= 1e-6 &&
                std::abs(have.beta_signed - sol.beta_signed) <= 1e-6)
                return false;
        sol.report = verify_solution(sol, profile, params);
        if (!sol.report.passed) return false;
        accepted.push_back(std::move(sol));
        return true;
    };

    if (problem.jobs > 1) {
        std::vector<std::thread> workers;
        std::atomic<size_t> next{0};
        int n_workers = std::min<int>(problem.jobs, static_cast<int>(seeds.size()));
        for (int w = 0; w < n_workers; ++w)
            workers.emplace_back([&]() {
                for (size_t i = next.fetch_add(1); i < seeds.size(); i = next.fetch_add(1))
                    refine_one(i);
            });
        for (auto& th : workers) th.join();
        for (size_t i = 0; i < seeds.size(); ++i) {
            consider(i);
            if (!problem.all_roots && !accepted.empty()) break;
        }
    } else {
        for (size_t i = 0; i < seeds.size(); ++i) {
            refine_one(i);
            consider(i);
            if (!problem.all_roots && !accepted.empty()) break;
        }
    }

    if (accepted.empty()) {
        std::ostringstream msg;
        msg << "no verified solution with k = " << problem.k << " (seeds tried: " << seeds.size()
            << ", nearest mismatch norm: ";
        if (std::isfinite(nearest)) msg << nearest;
        else msg << "none converged";
        msg << "; left angle range down to " << left.knots.back().angle
            << ", right up to " << right.knots.back().angle << ")";
        throw NotFoundError(msg.str());
    }
    return accepted;
}

NodalSolution Matcher::find_nodal(const MatchProblem& problem, const AssembleOptions& opts) {
    MatchProblem p = problem;
    p.all_roots = false;
    return find_all(p, opts).front();
}

NodalSolution find_nodal(const MatchProblem& problem, const AssembleOptions& opts) {
    Matcher matcher(problem.profile, problem.params);
    return matcher.find_nodal(problem, opts);
}

}  // namespace nodal
