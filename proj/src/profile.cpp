#include "nodal/profile.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

#include "nodal/errors.hpp"

namespace nodal {

namespace {

// Bracket the sign change of eval on (0,d) by scanning a uniform grid, then
// bisect to machine width. Returns nullopt if no bracket is found.
std::optional<double> locate_sign_change(const std::function<double(double)>& eval, double d,
                                         int n_grid = 64) {
    const double margin = d * 1e-9;
    double lo = margin, hi = d - margin;
    double flo = eval(lo), fhi = eval(hi);
    if (!(flo > 0.0 && fhi < 0.0)) {
        // Degenerate profile; scan for any bracket.
        bool found = false;
        double prev_t = lo, prev_f = flo;
        for (int i = 1; i <= n_grid; ++i) {
            double t = lo + (hi - lo) * static_cast<double>(i) / n_grid;
            double f = eval(t);
            if (prev_f > 0.0 && f <= 0.0) {
                lo = prev_t;
                hi = t;
                flo = prev_f;
                found = true;
                break;
            }
            prev_t = t;
            prev_f = f;
        }
        if (!found) return std::nullopt;
    }
    while (hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * d) {
        double mid = 0.5 * (lo + hi);
        if (eval(mid) > 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

void validate_spec(const ProfileSpec& spec) {
    std::ostringstream msg;
    if (spec.n < 3) msg << "n must be >= 3 (got " << spec.n << ")";
    else if (spec.m1 < 0 || spec.m1 > spec.n - 2)
        msg << "m1 must satisfy 0 <= m1 <= n-2 (got m1=" << spec.m1 << ", n=" << spec.n << ")";
    else if (spec.m2 < 0 || spec.m2 > spec.n - 2)
        msg << "m2 must satisfy 0 <= m2 <= n-2 (got m2=" << spec.m2 << ", n=" << spec.n << ")";
    else if (!(spec.d > 0.0)) msg << "d must be positive (got " << spec.d << ")";
    else if (spec.kind == ProfileSpec::Kind::custom && spec.expression.empty())
        msg << "custom profile requires an expression";
    else return;
    throw InvalidSpecError("invalid profile spec: " + msg.str());
}

Profile::Profile(ProfileSpec spec, std::function<double(double)> eval)
    : spec_(std::move(spec)), eval_(std::move(eval)) {
    exp_left_ = static_cast<double>(spec_.n - spec_.m1 - 1);
    exp_right_ = static_cast<double>(spec_.n - spec_.m2 - 1);
    t0_ = locate_sign_change(eval_, spec_.d);
}

double Profile::h(double t) const {
    if (!(t > 0.0 && t < spec_.d))
        throw DomainError("h(t) evaluated at t=" + std::to_string(t) +
                          " outside (0, d); the profile is singular at the endpoints");
    return eval_(t);
}

double Profile::sign_change() const {
    if (!t0_) throw ProfileInvalidError("profile has no sign change on (0, d)");
    return *t0_;
}

Profile make_model_profile(int n, int m1, int m2, double d) {
    ProfileSpec spec;
    spec.kind = ProfileSpec::Kind::model;
    spec.n = n;
    spec.m1 = m1;
    spec.m2 = m2;
    spec.d = d;
    validate_spec(spec);
    const double h0 = static_cast<double>(n - m1 - 1);
    const double hd = static_cast<double>(n - m2 - 1);
    const double c = M_PI / (2.0 * d);
    auto eval = [h0, hd, c](double t) {
        double x = c * t;
        return h0 * c / std::tan(x) - hd * c * std::tan(x);
    };
    return Profile(std::move(spec), eval);
}

Profile make_custom_profile(const ProfileSpec& spec) {
    validate_spec(spec);
    Expression expr = Expression::parse(spec.expression);
    auto eval = [expr](double t) { return expr.eval(t); };
    return Profile(spec, eval);
}

Profile make_profile(const ProfileSpec& spec) {
    if (spec.kind == ProfileSpec::Kind::model)
        return make_model_profile(spec.n, spec.m1, spec.m2, spec.d);
    return make_custom_profile(spec);
}

double eval_h(const Profile& profile, double t) { return profile.h(t); }

double find_t0(const Profile& profile) { return profile.sign_change(); }

ValidationReport check_profile(const Profile& profile, double tol, int n_samples) {
    if (n_samples < 16) throw ConfigurationError("check_profile requires n_samples >= 16");
    ValidationReport rep;
    rep.tol = tol;
    rep.n_samples = n_samples;
    rep.h0_expected = profile.exponent_left();
    rep.hd_expected = profile.exponent_right();
    const double d = profile.length();

    // Monotonicity: consecutive differences on a uniform interior grid.
    const double a = d * 1e-4;
    double prev = profile.h(a);
    for (int i = 1; i < n_samples; ++i) {
        double t = a + (d - 2.0 * a) * static_cast<double>(i) / (n_samples - 1);
        double v = profile.h(t);
        if (!(v < prev)) ++rep.monotonicity_violations;
        prev = v;
    }
    rep.monotone = rep.monotonicity_violations == 0;

    // Endpoint limits on t = d*2^-j with t^2 Richardson extrapolation.
    auto measure = [&](auto value_at) {
        double m_prev = 0.0, extrap = 0.0;
        for (int j = 4; j <= 20; ++j) {
            double s = d * std::pow(2.0, -j);
            double m = value_at(s);
            if (j > 4) extrap = (4.0 * m - m_prev) / 3.0;
            m_prev = m;
        }
        return extrap;
    };
    rep.h0_measured = measure([&](double s) { return s * profile.h(s); });
    rep.hd_measured = measure([&](double s) { return -s * profile.h(d - s); });
    rep.limits_ok = std::abs(rep.h0_measured - rep.h0_expected) <= tol &&
                    std::abs(rep.hd_measured - rep.hd_expected) <= tol;

    if (profile.has_sign_change()) {
        double t0 = profile.sign_change();
        rep.t0 = t0;
        rep.sign_pattern_ok = profile.h(0.5 * t0) > 0.0 && profile.h(t0 + 0.5 * (d - t0)) < 0.0;
    }

    rep.passed = rep.monotone && rep.limits_ok && rep.t0.has_value() && rep.sign_pattern_ok;
    return rep;
}

ExponentReport check_exponent(int n, int m1, int m2, double q) {
    if (n < 3) throw InvalidSpecError("check_exponent requires n >= 3");
    if (!(q > 1.0)) throw InvalidSpecError("check_exponent requires q > 1");
    ExponentReport rep;
    rep.m = std::min(m1, m2);
    rep.q = q;
    rep.drift_exponent = static_cast<double>(n - m1 - 1);
    const int denom = n - rep.m - 2;
    if (denom == 0) {
        rep.unbounded = true;
        rep.p_gate = std::numeric_limits<double>::infinity();
        rep.q_subcritical = true;
    } else {
        rep.p_gate = static_cast<double>(n - rep.m + 2) / static_cast<double>(denom);
        rep.q_subcritical = q < rep.p_gate;
    }
    rep.oscillation_bound_ok = 0.5 * (rep.drift_exponent + 1.0) < (q + 1.0) / (q - 1.0);
    rep.passed = rep.q_subcritical;
    return rep;
}

}  // namespace nodal
