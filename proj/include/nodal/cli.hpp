#pragma once

#include <string>

#include "nodal/config.hpp"

namespace nodal {

enum ExitCode {
    exit_ok = 0,
    exit_verify_failed = 1,
    exit_invalid_input = 2,
    exit_budget_exhausted = 3,
    exit_not_found = 4,
    exit_exponent_gate = 5,
};

int cmd_profile(const RunConfig& cfg);
int cmd_shoot(const RunConfig& cfg);
int cmd_sweep_angles(const RunConfig& cfg);
int cmd_match(const RunConfig& cfg);
int cmd_verify(const std::string& path);

// Full command-line entry point (argument parsing, dispatch, error mapping).
int run_cli(int argc, const char* const* argv);

}  // namespace nodal
