#pragma once

#include "nodal/profile.hpp"
#include "nodal/solution.hpp"

namespace nodal {

// Sup-norm of the equation residual D2(u) + h*D1(u) + g(u) over the stored
// uniform grid, measured with 4th-order central differences. Guard bands of
// width 2*delta (at least one stencil) are excluded at each endpoint: the
// stencil cannot straddle the singular coefficient. Requires >= 2001 uniform
// points; throws ResolutionError otherwise.
double residual_norm(const NodalSolution& sol, const Profile& profile, const OdeParams& params);

// Full a-posteriori verification: residual, seam jump (fresh re-shoot of both
// sides), boundary series consistency, zero relocation and count, and the
// energy direction law. Never reuses matcher trajectories; works from the
// stored grid plus re-integration. Failures are recorded in the report.
VerificationReport verify_solution(const NodalSolution& sol, const Profile& profile,
                                   const OdeParams& params, const ToleranceSet& tols = {});

}  // namespace nodal
