#pragma once

#include <functional>
#include <optional>
#include <string>

#include "nodal/expression.hpp"

namespace nodal {

// Parameters of a mean-curvature profile h on (0, d). The integers (n, m1, m2)
// fix the singular exponents at the endpoints: t*h(t) -> n-m1-1 as t->0 and
// (t-d)*h(t) -> n-m2-1 as t->d.
struct ProfileSpec {
    enum class Kind { model, custom };
    Kind kind = Kind::model;
    int n = 0;
    int m1 = 0;
    int m2 = 0;
    double d = 0.0;
    std::string expression;  // custom profiles only
};

// Throws InvalidSpecError unless n >= 3, 0 <= m1,m2 <= n-2, d > 0.
void validate_spec(const ProfileSpec& spec);

// Immutable drift coefficient h(t) of the reduced equation. The sign change t0
// is located once at construction time; instances are safe to share across
// threads.
class Profile {
public:
    Profile(ProfileSpec spec, std::function<double(double)> eval);

    // h(t); throws DomainError unless 0 < t < d (h is singular at both ends).
    double h(double t) const;

    const ProfileSpec& spec() const { return spec_; }
    double length() const { return spec_.d; }
    double exponent_left() const { return exp_left_; }    // n - m1 - 1
    double exponent_right() const { return exp_right_; }  // n - m2 - 1

    // The unique zero of h; throws ProfileInvalidError if no sign change was
    // bracketed at construction.
    double sign_change() const;
    bool has_sign_change() const { return t0_.has_value(); }

private:
    ProfileSpec spec_;
    std::function<double(double)> eval_;
    double exp_left_ = 0.0;
    double exp_right_ = 0.0;
    std::optional<double> t0_;
};

// Model family h(t) = H0*c*cot(c*t) - Hd*c*tan(c*t), c = pi/(2d): the simplest
// closed form realizing arbitrary admissible endpoint exponents with h' < 0.
Profile make_model_profile(int n, int m1, int m2, double d);

// Custom closed-form profile from spec.expression (see Expression).
Profile make_custom_profile(const ProfileSpec& spec);

// Dispatch on spec.kind.
Profile make_profile(const ProfileSpec& spec);

double eval_h(const Profile& profile, double t);
double find_t0(const Profile& profile);

struct ValidationReport {
    bool monotone = false;
    int monotonicity_violations = 0;
    double h0_measured = 0.0;
    double hd_measured = 0.0;
    double h0_expected = 0.0;
    double hd_expected = 0.0;
    bool limits_ok = false;
    std::optional<double> t0;
    bool sign_pattern_ok = false;
    bool passed = false;
    double tol = 0.0;
    int n_samples = 0;
};

// Samples monotonicity, measures both endpoint limits by Richardson
// extrapolation on a geometric grid, and locates t0. Failures are recorded in
// the report, never thrown. Requires n_samples >= 16.
ValidationReport check_profile(const Profile& profile, double tol = 1e-5, int n_samples = 256);

struct ExponentReport {
    double p_gate = 0.0;  // (n-m+2)/(n-m-2) with m = min(m1,m2); +inf if m = n-2
    bool unbounded = false;
    int m = 0;
    double drift_exponent = 0.0;  // H0 = n - m1 - 1
    double q = 0.0;
    bool q_subcritical = false;       // q < p_gate
    bool oscillation_bound_ok = false;  // (H0+1)/2 < (q+1)/(q-1)
    bool passed = false;
};

// Subcriticality gate for the nonlinearity exponent q. The two booleans agree
// whenever m1 = min(m1, m2).
ExponentReport check_exponent(int n, int m1, int m2, double q);

}  // namespace nodal
