#include "nodal/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nodal/errors.hpp"

namespace nodal {

namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap_pi(double x) { return std::remainder(x, 2.0 * kPi); }

// Zeros located within this distance of the matching endpoint belong to the
// seam, not to the open interval.
double end_guard(double span, const OdeParams& params) {
    return 1e3 * std::numeric_limits<double>::epsilon() * span + 10.0 * params.tol_abs;
}

ShotResult shoot_side(Side side, double param, const Profile& profile, const OdeParams& params) {
    const double d = profile.length();
    const double t0 = profile.sign_change();
    const double span = side == Side::left ? t0 : d - t0;

    ShotResult res;
    res.point.param = param;
    res.point.side = side;
    if (param == 0.0) {
        res.trajectory.terminal = {span, 0.0, 0.0};
        return res;  // trivial solution
    }

    State start;
    DriftFn drift;
    if (side == Side::left) {
        start = step_off_left(param, profile, params);
        drift = [&profile](double t) { return profile.h(t); };
    } else {
        State at_d = step_off_right(param, profile, params);
        start = {d - at_d.t, at_d.u, -at_d.up};  // reflected coordinates
        drift = [&profile, d](double s) { return -profile.h(d - s); };
    }
    res.trajectory = integrate_drift(drift, start, span, params);
    const State& end = res.trajectory.terminal;
    res.point.u_t0 = end.u;
    res.point.up_t0 = side == Side::left ? end.up : -end.up;
    res.point.zeros_inside = count_zeros(res.trajectory, 0.0, span - end_guard(span, params));
    return res;
}

}  // namespace

ShotPoint shoot_left(double alpha, const Profile& profile, const OdeParams& params) {
    return shoot_side(Side::left, alpha, profile, params).point;
}

ShotPoint shoot_right(double beta, const Profile& profile, const OdeParams& params) {
    return shoot_side(Side::right, beta, profile, params).point;
}

ShotResult shoot_left_full(double alpha, const Profile& profile, const OdeParams& params) {
    return shoot_side(Side::left, alpha, profile, params);
}

ShotResult shoot_right_full(double beta, const Profile& profile, const OdeParams& params) {
    return shoot_side(Side::right, beta, profile, params);
}

Trajectory reflect_trajectory(const Trajectory& traj, double d) {
    Trajectory out;
    out.samples.reserve(traj.samples.size());
    for (auto it = traj.samples.rbegin(); it != traj.samples.rend(); ++it)
        out.samples.push_back({d - it->t, it->u, -it->up});
    out.energy.assign(traj.energy.rbegin(), traj.energy.rend());
    for (auto it = traj.zeros.rbegin(); it != traj.zeros.rend(); ++it)
        out.zeros.push_back(d - *it);
    out.terminal = out.samples.empty() ? State{} : out.samples.back();
    return out;
}

AngleSweeper::AngleSweeper(Side side, const Profile& profile, const OdeParams& params,
                           SweepOptions opts)
    : side_(side), profile_(profile), params_(params), opts_(opts) {
    RawShot s1 = raw_shot(1.0);
    // The anchor angle is 0 by definition; the raw angle at param 1 is kept as
    // the unwrapping reference.
    anchor_ = {1.0, 0.0, s1.radius, s1.zeros};
    out_frontier_ = {1.0, 0.0, s1};
    in_frontier_ = out_frontier_;
}

AngleSweeper::RawShot AngleSweeper::raw_shot(double p) const {
    ++shots_;
    ShotPoint sp = side_ == Side::left ? shoot_left(p, profile_, params_)
                                       : shoot_right(p, profile_, params_);
    RawShot rs;
    rs.raw_angle = std::atan2(sp.up_t0, sp.u_t0);
    rs.radius = std::hypot(sp.u_t0, sp.up_t0);
    rs.zeros = sp.zeros_inside;
    return rs;
}

AngleSweeper::Node AngleSweeper::refine_and_commit(std::vector<AngleKnot>& knots,
                                                   const Node& from, Node to) {
    std::vector<Node> stack;
    stack.push_back(std::move(to));
    Node current = from;
    while (!stack.empty()) {
        Node& top = stack.back();
        double gap = wrap_pi(top.shot.raw_angle - current.shot.raw_angle);
        double span = std::abs(top.p - current.p);
        if (std::abs(gap) <= opts_.theta_max || span <= 1e-12 * std::abs(top.p)) {
            top.angle = current.angle + gap;
            knots.push_back({top.p, top.angle, top.shot.radius, top.shot.zeros});
            current = top;
            stack.pop_back();
            continue;
        }
        if (shots_ >= opts_.budget)
            throw PartialCurveError("angle sweep refinement budget exhausted", curve());
        double p_mid = 0.5 * (current.p + top.p);
        stack.push_back({p_mid, 0.0, raw_shot(p_mid)});
    }
    return current;
}

void AngleSweeper::extend_to_param(double p_max) {
    while (out_frontier_.p < p_max) {
        if (shots_ >= opts_.budget)
            throw PartialCurveError("angle sweep refinement budget exhausted", curve());
        double p_next = std::min(out_frontier_.p * opts_.growth, p_max);
        out_frontier_ = refine_and_commit(outward_, out_frontier_, {p_next, 0.0, raw_shot(p_next)});
    }
}

void AngleSweeper::extend_to_angle(double target_abs_angle) {
    while (std::abs(out_frontier_.angle) < target_abs_angle) {
        if (shots_ >= opts_.budget)
            throw PartialCurveError("angle sweep refinement budget exhausted", curve());
        double p_next = out_frontier_.p * opts_.growth;
        out_frontier_ = refine_and_commit(outward_, out_frontier_, {p_next, 0.0, raw_shot(p_next)});
    }
}

void AngleSweeper::extend_inward(double p_min) {
    if (!(p_min > 0.0)) throw ConfigurationError("p_min must be positive");
    while (in_frontier_.p > p_min) {
        if (shots_ >= opts_.budget)
            throw PartialCurveError("angle sweep refinement budget exhausted", curve());
        double p_next = std::max(in_frontier_.p / opts_.growth, p_min);
        in_frontier_ = refine_and_commit(inward_, in_frontier_, {p_next, 0.0, raw_shot(p_next)});
    }
}

AngleCurve AngleSweeper::curve() const {
    AngleCurve c;
    c.side = side_;
    c.theta_max = opts_.theta_max;
    c.knots.reserve(inward_.size() + 1 + outward_.size());
    for (auto it = inward_.rbegin(); it != inward_.rend(); ++it) c.knots.push_back(*it);
    c.knots.push_back(anchor_);
    c.knots.insert(c.knots.end(), outward_.begin(), outward_.end());
    c.p_min = c.knots.front().param;
    c.p_max = c.knots.back().param;
    return c;
}

AngleCurve angle_sweep(Side side, double p_min, double p_max, const Profile& profile,
                       const OdeParams& params, SweepOptions opts) {
    if (!(p_min > 0.0 && p_min <= 1.0 && p_max >= 1.0))
        throw ConfigurationError("angle sweep requires 0 < p_min <= 1 <= p_max");
    AngleSweeper sweeper(side, profile, params, opts);
    sweeper.extend_to_param(p_max);
    sweeper.extend_inward(p_min);
    return sweeper.curve();
}

AngleCurve extend_odd(const AngleCurve& curve) {
    AngleCurve out = curve;
    out.covers_negative = true;
    std::vector<AngleKnot> neg;
    neg.reserve(curve.knots.size());
    for (auto it = curve.knots.rbegin(); it != curve.knots.rend(); ++it) {
        // angle(-p) = angle(p) + pi; the count rule for the negative branch is
        // shifted by the same pi, so the zero count carries over unchanged.
        neg.push_back({-it->param, it->angle + kPi, it->radius, it->zeros});
    }
    neg.insert(neg.end(), out.knots.begin(), out.knots.end());
    out.knots = std::move(neg);
    return out;
}

int expected_zero_count(double angle, double tol) {
    double x = (angle - 0.5 * kPi) / kPi;
    double dist = std::abs(x - std::round(x)) * kPi;
    if (dist <= tol)
        throw AmbiguousAngleError("angle " + std::to_string(angle) +
                                  " lies within tolerance of an odd multiple of pi/2");
    double c = std::ceil((-angle - 0.5 * kPi) / kPi);
    return c > 0.0 ? static_cast<int>(c) : 0;
}

int expected_zero_count(Side side, double angle, double tol) {
    return expected_zero_count(side == Side::left ? angle : -angle, tol);
}

ExitPoint exit_param(const AngleCurve& curve, double target_angle, const Profile& profile,
                     const OdeParams& params, double angle_tol) {
    if (curve.side == Side::left && target_angle > 0.0)
        throw ConfigurationError("left-curve exit targets must be <= 0");
    if (curve.side == Side::right && target_angle < 0.0)
        throw ConfigurationError("right-curve exit targets must be >= 0");
    const auto& ks = curve.knots;
    for (size_t i = ks.size(); i-- > 1;) {
        double g0 = ks[i - 1].angle - target_angle;
        double g1 = ks[i].angle - target_angle;
        if (ks[i - 1].param < 0.0) break;  // odd-extended part: stay on the positive branch
        if (g0 == 0.0 && g1 == 0.0) continue;
        if (g0 * g1 > 0.0) continue;

        AngleSweeper probe(curve.side, profile, params);
        struct Ref {
            double p, angle, raw;
        };
        AngleSweeper::RawShot slo = probe.raw_shot(ks[i - 1].param);
        Ref lo{ks[i - 1].param, ks[i - 1].angle, slo.raw_angle};
        double hi = ks[i].param;
        double best_p = g1 == 0.0 ? ks[i].param : lo.p;
        double best_angle = g1 == 0.0 ? ks[i].angle : lo.angle;
        double best_radius = g1 == 0.0 ? ks[i].radius : ks[i - 1].radius;
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (lo.p + hi);
            AngleSweeper::RawShot sm = probe.raw_shot(mid);
            double am = lo.angle + wrap_pi(sm.raw_angle - lo.raw);
            if (std::abs(am - target_angle) <= std::abs(best_angle - target_angle)) {
                best_p = mid;
                best_angle = am;
                best_radius = sm.radius;
            }
            if ((lo.angle - target_angle) * (am - target_angle) <= 0.0) hi = mid;
            else lo = {mid, am, sm.raw_angle};
            if (std::abs(am - target_angle) <= angle_tol) break;
        }
        return {best_p, best_angle, best_radius};
    }
    std::ostringstream msg;
    msg << "exit target angle " << target_angle << " not attained on the sampled curve "
        << "(range [" << ks.front().angle << ", " << ks.back().angle
        << "]); extend p_max and retry";
    throw NotFoundError(msg.str());
}

CurveCheck check_curve(const AngleCurve& curve) {
    CurveCheck chk;
    chk.knots = static_cast<int>(curve.knots.size());
    const double bound_tol = 1e-9;
    for (const AngleKnot& k : curve.knots) {
        try {
            int expected = expected_zero_count(curve.side, k.param < 0.0 ? k.angle - kPi : k.angle);
            if (expected != k.zeros) ++chk.zero_rule_mismatches;
        } catch (const AmbiguousAngleError&) {
            ++chk.ambiguous;
        }
        if (curve.side == Side::left && k.param > 1.0 && !(k.angle < 0.5 * kPi - bound_tol))
            ++chk.angle_bound_violations;
        if (curve.side == Side::right && k.param > 1.0 && !(k.angle > -0.5 * kPi + bound_tol))
            ++chk.angle_bound_violations;
        if (std::abs(k.param) >= 1e-6 && !(k.radius > 1e-12)) ++chk.radius_violations;
    }
    for (size_t i = 1; i < curve.knots.size(); ++i) {
        if ((curve.knots[i - 1].param < 0.0) != (curve.knots[i].param < 0.0)) continue;
        if (std::abs(curve.knots[i].angle - curve.knots[i - 1].angle) >
            curve.theta_max + 1e-12)
            ++chk.contract_violations;
    }
    return chk;
}

}  // namespace nodal
