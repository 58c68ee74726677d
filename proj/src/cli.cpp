#include "nodal/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <future>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nodal/errors.hpp"
#include "nodal/io.hpp"
#include "nodal/matcher.hpp"
#include "nodal/verify.hpp"

namespace fs = std::filesystem;

namespace nodal {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void ensure_out_dir(const RunConfig& cfg) { fs::create_directories(cfg.output.dir); }

void write_json(const std::string& path, const nlohmann::json& j) {
    save_text(path, j.dump(2) + "\n");
}

std::string profile_plot_script() {
    return "# gnuplot: mean-curvature profile\n"
           "set datafile separator ','\n"
           "set grid\n"
           "set xlabel 't'\n"
           "set ylabel 'h(t)'\n"
           "set yrange [-50:50]\n"
           "plot 'profile.csv' skip 1 using 1:2 with lines title 'h(t)'\n";
}

std::string curves_plot_script() {
    return "# gnuplot: shooting angle curves\n"
           "set datafile separator ','\n"
           "set grid\n"
           "set xlabel 'param'\n"
           "set ylabel 'angle (rad)'\n"
           "set logscale x\n"
           "plot 'left_curve.csv'  skip 1 using 1:2 with lines title 'left angle', \\\n"
           "     'right_curve.csv' skip 1 using 1:2 with lines title 'right angle'\n"
           "pause -1 'press enter for the angle-radius view'\n"
           "unset logscale x\n"
           "set xlabel 'angle (rad)'\n"
           "set ylabel 'radius'\n"
           "plot 'left_curve.csv'  skip 1 using 2:3 with lines title 'left', \\\n"
           "     'right_curve.csv' skip 1 using 2:3 with lines title 'right'\n";
}

std::string solutions_plot_script(const std::vector<int>& ks) {
    std::ostringstream out;
    out << "# gnuplot: matched solutions\n"
        << "set datafile separator ','\n"
        << "set grid\n"
        << "set xlabel 't'\n"
        << "set ylabel 'u(t)'\n"
        << "plot ";
    for (size_t i = 0; i < ks.size(); ++i) {
        if (i) out << ", \\\n     ";
        out << "'solution_" << ks[i] << ".csv' skip 1 using 1:2 with lines title 'k=" << ks[i]
            << "'";
    }
    out << "\n";
    return out.str();
}

std::string shot_plot_script(const std::vector<std::string>& names) {
    std::ostringstream out;
    out << "# gnuplot: shot trajectories\n"
        << "set datafile separator ','\n"
        << "set grid\n"
        << "set xlabel 't'\n"
        << "set ylabel 'u(t)'\n"
        << "plot ";
    for (size_t i = 0; i < names.size(); ++i) {
        if (i) out << ", \\\n     ";
        out << "'" << names[i] << "' skip 1 using 1:2 with lines title '" << names[i] << "'";
    }
    out << "\n";
    return out.str();
}

nlohmann::json curve_check_to_json(const CurveCheck& chk) {
    return {{"knots", chk.knots},
            {"ambiguous", chk.ambiguous},
            {"zero_rule_mismatches", chk.zero_rule_mismatches},
            {"angle_bound_violations", chk.angle_bound_violations},
            {"radius_violations", chk.radius_violations},
            {"contract_violations", chk.contract_violations}};
}

}  // namespace

int cmd_profile(const RunConfig& cfg) {
    Profile profile = make_profile(cfg.profile);
    ensure_out_dir(cfg);

    double margin = std::min(cfg.profile.d / 100.0, std::pow(cfg.ode.tol_abs, 0.25));
    margin = std::max(margin, cfg.profile.d * 1e-9);
    write_profile_csv(join_path(cfg.output.dir, "profile.csv"), profile, 1001, margin);

    ValidationReport rep = check_profile(profile);
    ExponentReport exp_rep = check_exponent(cfg.profile.n, cfg.profile.m1, cfg.profile.m2,
                                            cfg.ode.q);
    nlohmann::json j;
    j["profile"] = profile_to_json(cfg.profile);
    j["t0"] = rep.t0 ? nlohmann::json(*rep.t0) : nlohmann::json();
    j["monotone"] = rep.monotone;
    j["monotonicity_violations"] = rep.monotonicity_violations;
    j["h0_measured"] = rep.h0_measured;
    j["h0_expected"] = rep.h0_expected;
    j["hd_measured"] = rep.hd_measured;
    j["hd_expected"] = rep.hd_expected;
    j["limits_ok"] = rep.limits_ok;
    j["sign_pattern_ok"] = rep.sign_pattern_ok;
    j["tol"] = rep.tol;
    j["n_samples"] = rep.n_samples;
    j["passed"] = rep.passed;
    j["exponent"] = {{"p_gate", exp_rep.unbounded ? nlohmann::json("inf")
                                                  : nlohmann::json(exp_rep.p_gate)},
                     {"m", exp_rep.m},
                     {"q", exp_rep.q},
                     {"q_subcritical", exp_rep.q_subcritical},
                     {"oscillation_bound_ok", exp_rep.oscillation_bound_ok},
                     {"passed", exp_rep.passed}};
    write_json(join_path(cfg.output.dir, "validation.json"), j);
    save_text(join_path(cfg.output.dir, "plot_profile.gp"), profile_plot_script());

    std::printf("profile: t0=%s monotone=%d limits_ok=%d passed=%d\n",
                rep.t0 ? fmt17(*rep.t0).c_str() : "none", rep.monotone ? 1 : 0,
                rep.limits_ok ? 1 : 0, rep.passed ? 1 : 0);
    return rep.passed ? exit_ok : exit_verify_failed;
}

int cmd_shoot(const RunConfig& cfg) {
    if (cfg.shoot.params.empty())
        throw InvalidSpecError("shoot.params must list at least one shooting value");
    Profile profile = make_profile(cfg.profile);
    ensure_out_dir(cfg);
    const char* side_name = cfg.shoot.side == Side::left ? "left" : "right";
    std::vector<std::string> csv_names;
    nlohmann::json summary = nlohmann::json::array();
    for (size_t i = 0; i < cfg.shoot.params.size(); ++i) {
        double p = cfg.shoot.params[i];
        ShotResult res = cfg.shoot.side == Side::left ? shoot_left_full(p, profile, cfg.ode)
                                                      : shoot_right_full(p, profile, cfg.ode);
        Trajectory traj = cfg.shoot.side == Side::left
                              ? std::move(res.trajectory)
                              : reflect_trajectory(res.trajectory, profile.length());
        std::ostringstream base;
        base << "shot_" << side_name << "_" << i;
        std::string csv_name = base.str() + ".csv";
        write_trajectory_csv(join_path(cfg.output.dir, csv_name), traj);
        write_zeros_csv(join_path(cfg.output.dir, base.str() + "_zeros.csv"), traj.zeros);
        csv_names.push_back(csv_name);
        summary.push_back({{"param", p},
                           {"side", side_name},
                           {"u_t0", res.point.u_t0},
                           {"up_t0", res.point.up_t0},
                           {"zeros_inside", res.point.zeros_inside},
                           {"csv", csv_name}});
        std::printf("shot %s %s: (u,up)@t0 = (%s, %s), zeros=%d\n", side_name,
                    fmt17(p).c_str(), fmt17(res.point.u_t0).c_str(),
                    fmt17(res.point.up_t0).c_str(), res.point.zeros_inside);
    }
    write_json(join_path(cfg.output.dir, "shots.json"), summary);
    save_text(join_path(cfg.output.dir, "plot_shots.gp"), shot_plot_script(csv_names));
    return exit_ok;
}

int cmd_sweep_angles(const RunConfig& cfg) {
    Profile profile = make_profile(cfg.profile);
    ensure_out_dir(cfg);
    SweepOptions opts;
    opts.theta_max = cfg.sweep.theta_max;
    opts.budget = cfg.sweep.budget;

    bool exhausted = false;
    auto run_side = [&](Side side) -> AngleCurve {
        try {
            AngleSweeper sweeper(side, profile, cfg.ode, opts);
            if (cfg.sweep.angle_target > 0.0) sweeper.extend_to_angle(cfg.sweep.angle_target);
            else sweeper.extend_to_param(cfg.sweep.p_max);
            sweeper.extend_inward(cfg.sweep.p_min);
            return sweeper.curve();
        } catch (const PartialCurveError& e) {
            exhausted = true;
            std::fprintf(stderr, "sweep budget exhausted: %s\n", e.what());
            return e.partial;
        }
    };

    nlohmann::json consistency;
    int total_mismatches = 0;
    auto emit = [&](const char* name, const AngleCurve& curve) {
        write_curve_csv(join_path(cfg.output.dir, std::string(name) + "_curve.csv"), curve);
        CurveCheck chk = check_curve(curve);
        consistency[name] = curve_check_to_json(chk);
        total_mismatches += chk.zero_rule_mismatches;
        std::printf("%s curve: %d knots, angle range [%s, %s], %d rule mismatches\n", name,
                    chk.knots, fmt17(curve.knots.front().angle).c_str(),
                    fmt17(curve.knots.back().angle).c_str(), chk.zero_rule_mismatches);
    };

    bool want_left = cfg.sweep.side != "right";
    bool want_right = cfg.sweep.side != "left";
    if (cfg.jobs > 1 && want_left && want_right) {
        auto fut = std::async(std::launch::async, run_side, Side::right);
        AngleCurve left = run_side(Side::left);
        AngleCurve right = fut.get();
        emit("left", left);
        emit("right", right);
    } else {
        if (want_left) emit("left", run_side(Side::left));
        if (want_right) emit("right", run_side(Side::right));
    }
    consistency["total_zero_rule_mismatches"] = total_mismatches;
    write_json(join_path(cfg.output.dir, "consistency.json"), consistency);
    save_text(join_path(cfg.output.dir, "plot_curves.gp"), curves_plot_script());
    return exhausted ? exit_budget_exhausted : exit_ok;
}

int cmd_match(const RunConfig& cfg) {
    if (cfg.match.ks.empty()) throw InvalidSpecError("match.k must list at least one target");
    Profile profile = make_profile(cfg.profile);

    ExponentReport gate = check_exponent(cfg.profile.n, cfg.profile.m1, cfg.profile.m2,
                                         cfg.ode.q);
    if (!gate.passed) {
        std::fprintf(stderr,
                     "exponent gate failed: q = %s is not below p_G = %s (m = %d); "
                     "no zero-accumulation regime\n",
                     fmt17(gate.q).c_str(),
                     gate.unbounded ? "inf" : fmt17(gate.p_gate).c_str(), gate.m);
        return exit_exponent_gate;
    }

    ensure_out_dir(cfg);
    SweepOptions sweep_opts;
    sweep_opts.theta_max = cfg.sweep.theta_max;
    sweep_opts.budget = cfg.sweep.budget;
    Matcher matcher(profile, cfg.ode, sweep_opts);

    std::vector<int> ks = cfg.match.ks;
    int k_max = *std::max_element(ks.begin(), ks.end());
    try {
        matcher.left_curve((k_max + 1) * kPi);
        matcher.right_curve((k_max + 1) * kPi);
    } catch (const PartialCurveError& e) {
        std::fprintf(stderr, "sweep budget exhausted before matching: %s\n", e.what());
        return exit_budget_exhausted;
    }

    AssembleOptions asm_opts;
    asm_opts.grid_points = cfg.output.grid_points;

    struct KResult {
        std::vector<NodalSolution> roots;
        std::string error;
    };
    std::vector<KResult> results(ks.size());
    auto solve_k = [&](size_t idx, int seed_jobs) {
        MatchProblem problem{profile, cfg.ode, ks[idx]};
        problem.alpha_min = cfg.match.alpha_min;
        problem.alpha_max = cfg.match.alpha_max;
        problem.beta_min = cfg.match.beta_min;
        problem.beta_max = cfg.match.beta_max;
        problem.max_seeds = cfg.match.max_seeds;
        problem.match_tol_scale = cfg.match.match_tol_scale;
        problem.all_roots = cfg.match.all_roots;
        problem.jobs = seed_jobs;
        try {
            results[idx].roots = matcher.find_all(problem, asm_opts);
        } catch (const NotFoundError& e) {
            results[idx].error = e.what();
        }
    };

    if (cfg.jobs > 1 && ks.size() > 1) {
        std::vector<std::future<void>> futs;
        size_t next = 0;
        while (next < ks.size()) {
            while (futs.size() < static_cast<size_t>(cfg.jobs) && next < ks.size())
                futs.push_back(std::async(std::launch::async, solve_k, next++, 1));
            for (auto& f : futs) f.get();
            futs.clear();
        }
    } else {
        for (size_t i = 0; i < ks.size(); ++i) solve_k(i, cfg.jobs);
    }

    bool any_missing = false;
    std::vector<int> found_ks;
    for (size_t i = 0; i < ks.size(); ++i) {
        int k = ks[i];
        if (results[i].roots.empty()) {
            any_missing = true;
            std::fprintf(stderr, "k=%d: %s\n", k, results[i].error.c_str());
            continue;
        }
        for (size_t r = 0; r < results[i].roots.size(); ++r) {
            const NodalSolution& sol = results[i].roots[r];
            std::ostringstream base;
            base << "solution_" << k;
            if (r > 0) base << "_root" << (r + 1);
            std::string csv_name = base.str() + ".csv";
            write_solution_csv(join_path(cfg.output.dir, csv_name), sol.grid);
            write_json(join_path(cfg.output.dir, base.str() + ".json"),
                       solution_to_json(sol, cfg.profile, cfg.ode, csv_name));
            if (r == 0) {
                found_ks.push_back(k);
                std::printf("k=%d: alpha=%s beta=%s residual=%s seam=(%s,%s) zeros=%d\n", k,
                            fmt17(sol.alpha).c_str(), fmt17(sol.beta_signed).c_str(),
                            fmt17(sol.report.residual_sup).c_str(),
                            fmt17(sol.seam_jump_u).c_str(), fmt17(sol.seam_jump_up).c_str(),
                            sol.k);
            }
        }
    }
    if (!found_ks.empty())
        save_text(join_path(cfg.output.dir, "plot_solutions.gp"),
                  solutions_plot_script(found_ks));
    return any_missing ? exit_not_found : exit_ok;
}

int cmd_verify(const std::string& path) {
    fs::path json_path(path);
    if (json_path.extension() != ".json") json_path += ".json";
    std::ifstream in(json_path);
    if (!in) throw IoError("cannot open solution json: " + json_path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed solution json: " + std::string(e.what()));
    }

    NodalSolution sol;
    ProfileSpec spec;
    OdeParams params;
    std::string csv_name;
    try {
        sol.alpha = j.at("alpha").get<double>();
        sol.beta_signed = j.at("beta").get<double>();
        sol.k = j.at("k").get<int>();
        sol.zeros = j.at("zeros").get<std::vector<double>>();
        spec = profile_from_json(j.at("profile"));
        params = params_from_json(j.at("ode"));
        csv_name = j.at("csv").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError("solution json missing fields: " + std::string(e.what()));
    }
    sol.grid = read_solution_csv((json_path.parent_path() / csv_name).string());

    Profile profile = make_profile(spec);
    VerificationReport rep = verify_solution(sol, profile, params);
    std::printf("residual_sup = %s  [%s]\n", fmt17(rep.residual_sup).c_str(),
                rep.residual_ok ? "ok" : "FAIL");
    std::printf("seam_jump    = (%s, %s)  [%s]\n", fmt17(rep.seam_jump_u).c_str(),
                fmt17(rep.seam_jump_up).c_str(), rep.seam_ok ? "ok" : "FAIL");
    std::printf("boundary     = (%s, %s)  [%s]\n", fmt17(rep.boundary_left).c_str(),
                fmt17(rep.boundary_right).c_str(), rep.boundary_ok ? "ok" : "FAIL");
    std::printf("zero_count   = %d (target %d)  [%s]\n", rep.zero_count, sol.k,
                rep.zeros_ok && rep.zeros_interior_ok ? "ok" : "FAIL");
    std::printf("energy_viol  = %s  [%s]\n", fmt17(rep.energy_violation).c_str(),
                rep.energy_ok ? "ok" : "FAIL");
    std::printf("passed       = %s\n", rep.passed ? "true" : "false");
    return rep.passed ? exit_ok : exit_verify_failed;
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"double-shooting solver for sign-changing solutions of "
                 "u'' + h(t)u' + lambda*u*(|u|^(q-1)-1) = 0 with u'(0) = u'(d) = 0"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    int jobs = 0;
    bool all_roots = false;
    std::string verify_path;

    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* opt = sub->add_option("--config", config_path, "run configuration file");
        if (config_required) opt->required();
        sub->add_option("--set", overrides, "override a config value (section.key=value)");
        sub->add_option("--jobs", jobs, "worker pool size for sweeps and multi-k matching");
        sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    };

    CLI::App* profile_cmd = app.add_subcommand("profile", "validate a profile and locate t0");
    add_common(profile_cmd, true);
    CLI::App* shoot_cmd = app.add_subcommand("shoot", "integrate shots and export trajectories");
    add_common(shoot_cmd, true);
    CLI::App* sweep_cmd = app.add_subcommand("sweep-angles", "build the shooting angle curves");
    add_common(sweep_cmd, true);
    CLI::App* match_cmd = app.add_subcommand("match", "find nodal solutions for each target k");
    add_common(match_cmd, true);
    match_cmd->add_flag("--all-roots", all_roots, "report every verified root, not just the first");
    CLI::App* verify_cmd = app.add_subcommand("verify", "re-verify an exported solution");
    verify_cmd->add_option("path", verify_path, "solution json (or its path without .json)");
    add_common(verify_cmd, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? exit_ok : exit_invalid_input;
    }

    try {
        if (verify_cmd->parsed() && !verify_path.empty()) return cmd_verify(verify_path);

        RawConfig raw = parse_config_file(config_path);
        apply_overrides(raw, overrides);
        RunConfig cfg = build_run_config(raw);
        if (!out_dir.empty()) cfg.output.dir = out_dir;
        if (jobs > 0) cfg.jobs = jobs;
        if (all_roots) cfg.match.all_roots = true;

        if (profile_cmd->parsed()) return cmd_profile(cfg);
        if (shoot_cmd->parsed()) return cmd_shoot(cfg);
        if (sweep_cmd->parsed()) return cmd_sweep_angles(cfg);
        if (match_cmd->parsed()) return cmd_match(cfg);
        if (verify_cmd->parsed()) {
            if (cfg.verify.path.empty())
                throw InvalidSpecError("verify needs a path argument or verify.path in the config");
            return cmd_verify(cfg.verify.path);
        }
        return exit_invalid_input;
    } catch (const PreconditionError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_exponent_gate;
    } catch (const NotFoundError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_not_found;
    } catch (const PartialCurveError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_budget_exhausted;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_invalid_input;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_invalid_input;
    }
}

}  // namespace nodal
