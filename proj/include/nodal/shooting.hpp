#pragma once

#include <vector>

#include "nodal/ivp.hpp"
#include "nodal/profile.hpp"

namespace nodal {

enum class Side { left, right };

// Value and derivative of a shot solution at the matching point t0, with the
// number of zeros strictly between the launch endpoint and t0.
struct ShotPoint {
    double param = 0.0;
    double u_t0 = 0.0;
    double up_t0 = 0.0;
    int zeros_inside = 0;
    Side side = Side::left;
};

// ShotPoint plus the full arc. For right shots the trajectory lives in the
// reflected coordinate s = d - t (ascending from the right endpoint).
struct ShotResult {
    ShotPoint point;
    Trajectory trajectory;
};

ShotPoint shoot_left(double alpha, const Profile& profile, const OdeParams& params);
ShotPoint shoot_right(double beta, const Profile& profile, const OdeParams& params);
ShotResult shoot_left_full(double alpha, const Profile& profile, const OdeParams& params);
ShotResult shoot_right_full(double beta, const Profile& profile, const OdeParams& params);

// Reflect a right-shot trajectory from s = d - t coordinates back to t.
Trajectory reflect_trajectory(const Trajectory& traj, double d);

struct AngleKnot {
    double param = 0.0;
    double angle = 0.0;
    double radius = 0.0;
    int zeros = 0;
};

// Continuous unwrapped branch of the shooting angle, anchored to 0 at
// param = 1. Consecutive knots differ by at most theta_max in raw angle, which
// makes the unwrapping unambiguous.
struct AngleCurve {
    Side side = Side::left;
    std::vector<AngleKnot> knots;
    double theta_max = 0.0;
    double p_min = 0.0;
    double p_max = 0.0;
    bool covers_negative = false;
};

struct SweepOptions {
    double theta_max = 0.7853981633974483;  // pi/4
    long budget = 200000;                   // max shots before giving up
    double growth = 1.25;                   // outward knot spacing factor
};

// Thrown when the refinement budget is exhausted; carries the curve built so
// far (still contract-satisfying on its covered range).
class PartialCurveError : public Error {
public:
    PartialCurveError(const std::string& msg, AngleCurve curve)
        : Error(msg), partial(std::move(curve)) {}
    AngleCurve partial;
};

// Incremental sweeper: owns the knots and the shot budget, so curves can be
// extended on demand (larger p_max or a deeper angle target).
class AngleSweeper {
public:
    AngleSweeper(Side side, const Profile& profile, const OdeParams& params,
                 SweepOptions opts = {});

    // Extend outward until the curve reaches p_max.
    void extend_to_param(double p_max);
    // Extend outward until |angle| >= target_abs_angle (left curves wind
    // negative, right curves positive). Throws PartialCurveError on budget
    // exhaustion.
    void extend_to_angle(double target_abs_angle);
    // Extend inward from 1 down to p_min.
    void extend_inward(double p_min);

    AngleCurve curve() const;
    long shots_used() const { return shots_; }

    struct RawShot {
        double raw_angle = 0.0;
        double radius = 0.0;
        int zeros = 0;
    };
    RawShot raw_shot(double p) const;

private:
    struct Node {
        double p;
        double angle;
        RawShot shot;
    };

    void commit_outward(double p_target);
    Node refine_and_commit(std::vector<AngleKnot>& knots, const Node& from, Node to);

    Side side_;
    const Profile& profile_;
    const OdeParams& params_;
    SweepOptions opts_;
    mutable long shots_ = 0;
    std::vector<AngleKnot> outward_;  // params > 1, ascending
    std::vector<AngleKnot> inward_;   // params < 1, descending as built
    AngleKnot anchor_;
    Node out_frontier_;
    Node in_frontier_;
};

// One-call sweep over [p_min, p_max] (spec operation).
AngleCurve angle_sweep(Side side, double p_min, double p_max, const Profile& profile,
                       const OdeParams& params, SweepOptions opts = {});

// Odd extension: angle(-p) = angle(p) + pi, radius unchanged; the zero count
// rule for the negative branch is the positive rule shifted by pi, which
// reproduces the count of the mirrored solution.
AngleCurve extend_odd(const AngleCurve& curve);

// Zero count determined by the unwrapped angle (left-side convention: each
// clockwise half-turn past -pi/2 adds one zero). Throws AmbiguousAngleError
// within tol of an odd multiple of pi/2.
int expected_zero_count(double angle, double tol = 1e-9);
int expected_zero_count(Side side, double angle, double tol = 1e-9);

struct ExitPoint {
    double param = 0.0;
    double angle = 0.0;
    double radius = 0.0;
};

// Largest sampled param where the curve attains target_angle, refined by
// bisection on fresh shots. Throws NotFoundError if the target is not
// attained on the sampled range.
ExitPoint exit_param(const AngleCurve& curve, double target_angle, const Profile& profile,
                     const OdeParams& params, double angle_tol = 1e-9);

// Remark-3.5-style consistency tally plus the structural curve invariants.
struct CurveCheck {
    int knots = 0;
    int ambiguous = 0;
    int zero_rule_mismatches = 0;
    int angle_bound_violations = 0;  // left: angle >= pi/2 for param > 1, mirrored right
    int radius_violations = 0;       // radius <= 1e-12 at |param| >= 1e-6
    int contract_violations = 0;     // consecutive raw gap > theta_max
};
CurveCheck check_curve(const AngleCurve& curve);

}  // namespace nodal
