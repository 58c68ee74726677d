#include "nodal/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "nodal/errors.hpp"
#include "nodal/expression.hpp"

namespace nodal {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& section, const std::string& key, const std::string& v) {
    char* end = nullptr;
    double x = std::strtod(v.c_str(), &end);
    if (end && *end == '\0' && end != v.c_str()) return x;
    // Allow closed-form constants such as pi/2.
    try {
        return Expression::parse(v).eval(0.0);
    } catch (const Error&) {
        throw InvalidSpecError("config value " + section + "." + key + " is not a number: " + v);
    }
}

long parse_long(const std::string& section, const std::string& key, const std::string& v) {
    char* end = nullptr;
    long x = std::strtol(v.c_str(), &end, 10);
    if (!end || *end != '\0' || end == v.c_str())
        throw InvalidSpecError("config value " + section + "." + key + " is not an integer: " + v);
    return x;
}

bool parse_bool(const std::string& section, const std::string& key, const std::string& v) {
    std::string lo = v;
    std::transform(lo.begin(), lo.end(), lo.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lo == "true" || lo == "on" || lo == "1" || lo == "yes") return true;
    if (lo == "false" || lo == "off" || lo == "0" || lo == "no") return false;
    throw InvalidSpecError("config value " + section + "." + key + " is not a boolean: " + v);
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

RawConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    RawConfig raw;
    std::string line, section;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw InvalidSpecError("config line " + std::to_string(lineno) +
                                       ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            raw[section];
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidSpecError("config line " + std::to_string(lineno) +
                                   ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (section.empty())
            throw InvalidSpecError("config line " + std::to_string(lineno) +
                                   ": key outside any [section]");
        raw[section][key] = val;
    }
    return raw;
}

void apply_overrides(RawConfig& raw, const std::vector<std::string>& overrides) {
    for (const std::string& ov : overrides) {
        size_t eq = ov.find('=');
        size_t dot = ov.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq)
            throw InvalidSpecError("override must look like section.key=value: " + ov);
        std::string section = trim(ov.substr(0, dot));
        std::string key = trim(ov.substr(dot + 1, eq - dot - 1));
        std::string val = trim(ov.substr(eq + 1));
        if (section.empty() || key.empty())
            throw InvalidSpecError("override must look like section.key=value: " + ov);
        raw[section][key] = val;
    }
}

RunConfig build_run_config(const RawConfig& raw) {
    RunConfig cfg;
    static const std::map<std::string, std::set<std::string>> known = {
        {"profile", {"kind", "n", "m1", "m2", "d", "expression"}},
        {"ode", {"lambda", "q", "tol_abs", "tol_rel", "delta"}},
        {"shoot", {"side", "params"}},
        {"sweep", {"side", "p_min", "p_max", "theta_max", "budget", "angle_target"}},
        {"match",
         {"k", "alpha_min", "alpha_max", "beta_min", "beta_max", "max_seeds", "match_tol_scale",
          "all_roots"}},
        {"verify", {"path"}},
        {"output", {"dir", "grid_points"}},
        {"run", {"jobs", "deterministic"}},
    };
    for (const auto& [section, kv] : raw) {
        auto ks = known.find(section);
        if (ks == known.end()) throw InvalidSpecError("unknown config section [" + section + "]");
        for (const auto& [key, value] : kv)
            if (!ks->second.count(key))
                throw InvalidSpecError("unknown config key " + section + "." + key);
    }

    auto get = [&raw](const std::string& section, const std::string& key) -> const std::string* {
        auto s = raw.find(section);
        if (s == raw.end()) return nullptr;
        auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        return &k->second;
    };
    auto want_d = [&](const std::string& sec, const std::string& key, double& target) {
        if (const std::string* v = get(sec, key)) target = parse_double(sec, key, *v);
    };
    auto want_i = [&](const std::string& sec, const std::string& key, auto& target) {
        if (const std::string* v = get(sec, key))
            target = static_cast<std::decay_t<decltype(target)>>(parse_long(sec, key, *v));
    };
    auto want_b = [&](const std::string& sec, const std::string& key, bool& target) {
        if (const std::string* v = get(sec, key)) target = parse_bool(sec, key, *v);
    };
    auto want_s = [&](const std::string& sec, const std::string& key, std::string& target) {
        if (const std::string* v = get(sec, key)) target = *v;
    };

    std::string kind = "model";
    want_s("profile", "kind", kind);
    if (kind == "model") cfg.profile.kind = ProfileSpec::Kind::model;
    else if (kind == "custom" || kind == "custom-closed-form")
        cfg.profile.kind = ProfileSpec::Kind::custom;
    else throw InvalidSpecError("profile.kind must be model or custom (got " + kind + ")");
    want_i("profile", "n", cfg.profile.n);
    want_i("profile", "m1", cfg.profile.m1);
    want_i("profile", "m2", cfg.profile.m2);
    want_d("profile", "d", cfg.profile.d);
    want_s("profile", "expression", cfg.profile.expression);

    want_d("ode", "lambda", cfg.ode.lambda);
    want_d("ode", "q", cfg.ode.q);
    want_d("ode", "tol_abs", cfg.ode.tol_abs);
    want_d("ode", "tol_rel", cfg.ode.tol_rel);
    want_d("ode", "delta", cfg.ode.delta);

    std::string side = "left";
    want_s("shoot", "side", side);
    if (side == "left") cfg.shoot.side = Side::left;
    else if (side == "right") cfg.shoot.side = Side::right;
    else throw InvalidSpecError("shoot.side must be left or right");
    if (const std::string* v = get("shoot", "params"))
        for (const std::string& item : split_list(*v))
            cfg.shoot.params.push_back(parse_double("shoot", "params", item));

    want_s("sweep", "side", cfg.sweep.side);
    if (cfg.sweep.side != "left" && cfg.sweep.side != "right" && cfg.sweep.side != "both")
        throw InvalidSpecError("sweep.side must be left, right or both");
    want_d("sweep", "p_min", cfg.sweep.p_min);
    want_d("sweep", "p_max", cfg.sweep.p_max);
    want_d("sweep", "theta_max", cfg.sweep.theta_max);
    want_i("sweep", "budget", cfg.sweep.budget);
    want_d("sweep", "angle_target", cfg.sweep.angle_target);

    if (const std::string* v = get("match", "k"))
        for (const std::string& item : split_list(*v))
            cfg.match.ks.push_back(static_cast<int>(parse_long("match", "k", item)));
    want_d("match", "alpha_min", cfg.match.alpha_min);
    want_d("match", "alpha_max", cfg.match.alpha_max);
    want_d("match", "beta_min", cfg.match.beta_min);
    want_d("match", "beta_max", cfg.match.beta_max);
    want_i("match", "max_seeds", cfg.match.max_seeds);
    want_d("match", "match_tol_scale", cfg.match.match_tol_scale);
    want_b("match", "all_roots", cfg.match.all_roots);

    want_s("verify", "path", cfg.verify.path);

    want_s("output", "dir", cfg.output.dir);
    want_i("output", "grid_points", cfg.output.grid_points);

    want_i("run", "jobs", cfg.jobs);
    bool deterministic = true;
    want_b("run", "deterministic", deterministic);
    if (!deterministic)
        throw InvalidSpecError("run.deterministic cannot be disabled; runs are always seed-free");

    validate_spec(cfg.profile);
    validate_params(cfg.ode);
    if (cfg.output.grid_points < 2001)
        throw InvalidSpecError("output.grid_points must be >= 2001 for verifiable exports");
    if (cfg.jobs < 1) throw InvalidSpecError("run.jobs must be >= 1");
    return cfg;
}

}  // namespace nodal
