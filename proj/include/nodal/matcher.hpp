#pragma once

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "nodal/profile.hpp"
#include "nodal/shooting.hpp"
#include "nodal/solution.hpp"

namespace nodal {

// Search problem: find (alpha, beta) with matching shots at t0 whose assembled
// solution has exactly k interior zeros.
struct MatchProblem {
    Profile profile;
    OdeParams params;
    int k = 0;
    double alpha_min = 1.0;
    double alpha_max = 0.0;  // 0: extend automatically until the angle range suffices
    double beta_min = 1.0;
    double beta_max = 0.0;
    int max_seeds = 32;
    double match_tol_scale = 1e-9;  // accept at match_tol_scale * (1 + |alpha|)
    bool all_roots = false;
    int jobs = 1;
};

struct AssembleOptions {
    int grid_points = 2001;
    double blend_frac = 0.15;  // seam blend half-width as a fraction of the short side
};

// I(alpha) - F(beta_signed) componentwise.
std::array<double, 2> mismatch(double alpha, double beta_signed, const Profile& profile,
                               const OdeParams& params);

// Assemble the matched solution on a uniform grid: series extensions inside
// the step-off radii, direct integration elsewhere, and a smooth blend of the
// two arcs centered at t0 (weight 1/2 at t0 itself). Throws AssemblyError when
// the raw seam jump exceeds the match tolerance.
NodalSolution assemble(double alpha, double beta_signed, const Profile& profile,
                       const OdeParams& params, const AssembleOptions& opts = {});

// Caches angle sweeps across multiple k for the same profile and parameters.
class Matcher {
public:
    Matcher(Profile profile, OdeParams params, SweepOptions sweep_opts = {});
    ~Matcher();
    Matcher(Matcher&&) noexcept;
    Matcher& operator=(Matcher&&) noexcept;

    NodalSolution find_nodal(const MatchProblem& problem, const AssembleOptions& opts = {});
    std::vector<NodalSolution> find_all(const MatchProblem& problem,
                                        const AssembleOptions& opts = {});

    std::array<double, 2> mismatch(double alpha, double beta_signed) const;

    const AngleCurve& left_curve(double target_abs_angle);
    const AngleCurve& right_curve(double target_abs_angle);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Spec-shaped convenience wrapper around a one-shot Matcher.
NodalSolution find_nodal(const MatchProblem& problem, const AssembleOptions& opts = {});

}  // namespace nodal
