#pragma once

#include <map>
#include <string>
#include <vector>

#include "nodal/ivp.hpp"
#include "nodal/profile.hpp"
#include "nodal/shooting.hpp"

namespace nodal {

// One reproducible run, captured in a single config file plus command-line
// overrides. Unknown sections or keys are rejected.
struct RunConfig {
    ProfileSpec profile;
    OdeParams ode;

    struct Shoot {
        Side side = Side::left;
        std::vector<double> params;  // alpha (left) or beta (right) values
    } shoot;

    struct Sweep {
        std::string side = "both";  // left | right | both
        double p_min = 1e-3;
        double p_max = 50.0;
        double theta_max = 0.7853981633974483;
        long budget = 200000;
        double angle_target = 0.0;  // > 0: extend until |angle| >= target instead of p_max
    } sweep;

    struct Match {
        std::vector<int> ks;
        double alpha_min = 1.0;
        double alpha_max = 0.0;
        double beta_min = 1.0;
        double beta_max = 0.0;
        int max_seeds = 32;
        double match_tol_scale = 1e-9;
        bool all_roots = false;
    } match;

    struct Verify {
        std::string path;
    } verify;

    struct Output {
        std::string dir = "out";
        int grid_points = 2001;
    } output;

    int jobs = 1;
};

using RawConfig = std::map<std::string, std::map<std::string, std::string>>;

// INI-style file: [section] headers, key = value lines, '#' comments.
RawConfig parse_config_file(const std::string& path);

// Apply "section.key=value" strings on top of the file contents.
void apply_overrides(RawConfig& raw, const std::vector<std::string>& overrides);

// Validate and convert. Numeric values accept closed-form constants ("pi/2").
RunConfig build_run_config(const RawConfig& raw);

}  // namespace nodal
