#pragma once

#include <vector>

#include "nodal/ivp.hpp"

namespace nodal {

struct ToleranceSet {
    double residual = 1e-6;
    double seam = 1e-8;
    double boundary_abs = 1e-8;
    double boundary_rel = 1e-3;
    double energy_slack = 0.0;  // 0 selects 1e2 * tol_abs
};

struct VerificationReport {
    double residual_sup = 0.0;
    double seam_jump_u = 0.0;
    double seam_jump_up = 0.0;
    // Deviation of the stored derivative near each endpoint from the series
    // branch with u'(0) = u'(d) = 0; certifies the boundary condition without
    // differencing across the singularity.
    double boundary_left = 0.0;
    double boundary_right = 0.0;
    int zero_count = 0;
    std::vector<double> zeros;
    double energy_violation = 0.0;  // max wrong-direction energy increment
    bool residual_ok = false;
    bool seam_ok = false;
    bool boundary_ok = false;
    bool zeros_ok = false;
    bool zeros_interior_ok = false;
    bool energy_ok = false;
    bool passed = false;
    ToleranceSet tolerances;
};

// A matched global solution on [0, d] with its uniform export grid.
struct NodalSolution {
    double alpha = 0.0;
    double beta_signed = 0.0;
    int k = 0;
    std::vector<State> grid;
    std::vector<double> zeros;
    double seam_jump_u = 0.0;
    double seam_jump_up = 0.0;
    VerificationReport report;
};

}  // namespace nodal
