#include "nodal/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "nodal/errors.hpp"

namespace nodal {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
}

}  // namespace

void save_text(const std::string& path, const std::string& content) {
    auto out = open_out(path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

void write_profile_csv(const std::string& path, const Profile& profile, int n_points,
                       double margin) {
    auto out = open_out(path);
    out << "t,h\n";
    const double d = profile.length();
    for (int i = 0; i < n_points; ++i) {
        double t = margin + (d - 2.0 * margin) * static_cast<double>(i) / (n_points - 1);
        out << fmt17(t) << ',' << fmt17(profile.h(t)) << '\n';
    }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    auto out = open_out(path);
    out << "t,u,up,E\n";
    for (size_t i = 0; i < traj.samples.size(); ++i) {
        const State& s = traj.samples[i];
        double e = i < traj.energy.size() ? traj.energy[i] : 0.0;
        out << fmt17(s.t) << ',' << fmt17(s.u) << ',' << fmt17(s.up) << ',' << fmt17(e) << '\n';
    }
}

void write_zeros_csv(const std::string& path, const std::vector<double>& zeros) {
    auto out = open_out(path);
    out << "zero\n";
    for (double z : zeros) out << fmt17(z) << '\n';
}

void write_curve_csv(const std::string& path, const AngleCurve& curve) {
    auto out = open_out(path);
    out << "param,angle,radius,zeros\n";
    for (const AngleKnot& k : curve.knots)
        out << fmt17(k.param) << ',' << fmt17(k.angle) << ',' << fmt17(k.radius) << ','
            << k.zeros << '\n';
}

void write_solution_csv(const std::string& path, const std::vector<State>& grid) {
    auto out = open_out(path);
    out << "t,u,up\n";
    for (const State& s : grid)
        out << fmt17(s.t) << ',' << fmt17(s.u) << ',' << fmt17(s.up) << '\n';
}

std::vector<State> read_solution_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open solution csv: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty solution csv: " + path);
    if (line.rfind("t,u,up", 0) != 0) throw IoError("unexpected solution csv header: " + line);
    std::vector<State> grid;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        State s;
        char* end = nullptr;
        const char* p = line.c_str();
        s.t = std::strtod(p, &end);
        if (end == p || *end != ',') throw IoError("bad csv row " + std::to_string(lineno));
        p = end + 1;
        s.u = std::strtod(p, &end);
        if (end == p || *end != ',') throw IoError("bad csv row " + std::to_string(lineno));
        p = end + 1;
        s.up = std::strtod(p, &end);
        if (end == p) throw IoError("bad csv row " + std::to_string(lineno));
        grid.push_back(s);
    }
    return grid;
}

nlohmann::json profile_to_json(const ProfileSpec& spec) {
    nlohmann::json j;
    j["kind"] = spec.kind == ProfileSpec::Kind::model ? "model" : "custom";
    j["n"] = spec.n;
    j["m1"] = spec.m1;
    j["m2"] = spec.m2;
    j["d"] = spec.d;
    if (!spec.expression.empty()) j["expression"] = spec.expression;
    return j;
}

ProfileSpec profile_from_json(const nlohmann::json& j) {
    ProfileSpec spec;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "model") spec.kind = ProfileSpec::Kind::model;
    else if (kind == "custom") spec.kind = ProfileSpec::Kind::custom;
    else throw IoError("unknown profile kind in json: " + kind);
    spec.n = j.at("n").get<int>();
    spec.m1 = j.at("m1").get<int>();
    spec.m2 = j.at("m2").get<int>();
    spec.d = j.at("d").get<double>();
    if (j.contains("expression")) spec.expression = j["expression"].get<std::string>();
    return spec;
}

nlohmann::json params_to_json(const OdeParams& params) {
    nlohmann::json j;
    j["lambda"] = params.lambda;
    j["q"] = params.q;
    j["tol_abs"] = params.tol_abs;
    j["tol_rel"] = params.tol_rel;
    j["delta"] = params.delta;
    return j;
}

OdeParams params_from_json(const nlohmann::json& j) {
    OdeParams p;
    p.lambda = j.at("lambda").get<double>();
    p.q = j.at("q").get<double>();
    p.tol_abs = j.at("tol_abs").get<double>();
    p.tol_rel = j.at("tol_rel").get<double>();
    p.delta = j.at("delta").get<double>();
    return p;
}

nlohmann::json report_to_json(const VerificationReport& rep) {
    nlohmann::json j;
    j["residual_sup"] = rep.residual_sup;
    j["seam_jump"] = {rep.seam_jump_u, rep.seam_jump_up};
    j["boundary_derivative"] = {rep.boundary_left, rep.boundary_right};
    j["zero_count"] = rep.zero_count;
    j["zeros"] = rep.zeros;
    j["energy_violation"] = rep.energy_violation;
    j["residual_ok"] = rep.residual_ok;
    j["seam_ok"] = rep.seam_ok;
    j["boundary_ok"] = rep.boundary_ok;
    j["zeros_ok"] = rep.zeros_ok;
    j["zeros_interior_ok"] = rep.zeros_interior_ok;
    j["energy_ok"] = rep.energy_ok;
    j["passed"] = rep.passed;
    j["tolerances"] = {{"residual", rep.tolerances.residual},
                       {"seam", rep.tolerances.seam},
                       {"boundary_abs", rep.tolerances.boundary_abs},
                       {"boundary_rel", rep.tolerances.boundary_rel},
                       {"energy_slack", rep.tolerances.energy_slack}};
    return j;
}

nlohmann::json solution_to_json(const NodalSolution& sol, const ProfileSpec& spec,
                                const OdeParams& params, const std::string& csv_name) {
    nlohmann::json j;
    j["alpha"] = sol.alpha;
    j["beta"] = sol.beta_signed;
    j["k"] = sol.k;
    j["zeros"] = sol.zeros;
    j["residual_norm"] = sol.report.residual_sup;
    j["seam_jump"] = {sol.seam_jump_u, sol.seam_jump_up};
    j["energy_monotonicity_violation"] = sol.report.energy_violation;
    j["report"] = report_to_json(sol.report);
    j["profile"] = profile_to_json(spec);
    j["ode"] = params_to_json(params);
    j["grid_points"] = sol.grid.size();
    j["csv"] = csv_name;
    return j;
}

}  // namespace nodal
