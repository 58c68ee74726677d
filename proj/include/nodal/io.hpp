#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "nodal/ivp.hpp"
#include "nodal/profile.hpp"
#include "nodal/shooting.hpp"
#include "nodal/solution.hpp"

namespace nodal {

// Full-precision, locale-independent float formatting ("%.17g").
std::string fmt17(double v);

void save_text(const std::string& path, const std::string& content);

void write_profile_csv(const std::string& path, const Profile& profile, int n_points,
                       double margin);
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
void write_zeros_csv(const std::string& path, const std::vector<double>& zeros);
void write_curve_csv(const std::string& path, const AngleCurve& curve);
void write_solution_csv(const std::string& path, const std::vector<State>& grid);

std::vector<State> read_solution_csv(const std::string& path);

nlohmann::json profile_to_json(const ProfileSpec& spec);
ProfileSpec profile_from_json(const nlohmann::json& j);
nlohmann::json params_to_json(const OdeParams& params);
OdeParams params_from_json(const nlohmann::json& j);
nlohmann::json report_to_json(const VerificationReport& rep);
nlohmann::json solution_to_json(const NodalSolution& sol, const ProfileSpec& spec,
                                const OdeParams& params, const std::string& csv_name);

}  // namespace nodal
