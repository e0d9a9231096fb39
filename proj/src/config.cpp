#include "cfselfsim/config.hpp"

#include "cfselfsim/grid.hpp"
#include "cfselfsim/numerics.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace cfselfsim {

namespace {

struct KeyDef {
    const char* key;
    const char* fallback;  // nullptr: no default
};

// Every accepted key with its default. Order fixes the manifest order.
const std::vector<KeyDef>& schema() {
    static const std::vector<KeyDef> keys = {
        {"run.scenario", nullptr},
        {"run.oracle", ""},
        {"run.out", "runs"},
        {"run.seed", "1"},
        {"run.workers", "0"},
        {"coefficients.lambda", "2"},
        {"coefficients.alpha", "1"},
        {"coefficients.K0", "1"},
        {"coefficients.a0", "1"},
        {"daughter.kind", "power"},
        {"daughter.nu", "0"},
        {"daughter.file", ""},
        {"daughter.eps", "0"},
        {"grid.xmin", "1e-6"},
        {"grid.xmax", "1e3"},
        {"grid.n_cells", "256"},
        {"solver.mode", "physical"},
        {"solver.integrator", "auto"},
        {"solver.reconstruction", "vanleer"},
        {"solver.horizon", "1"},
        {"solver.cfl", "0.9"},
        {"solver.dt", "0"},
        {"solver.snapshot_every", "0.1"},
        {"solver.steady_tol", "1e-8"},
        {"solver.max_clip_mass", "-1"},
        {"initial.rho", "1"},
        {"profile.rho", ""},
        {"profile.s_max", "30"},
        {"profile.eps_list", ""},
        {"profile.rho_list", ""},
        {"verify.xlogx_samples", "100000"},
    };
    return keys;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const char* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end || v.empty()) throw ConfigError(key + ": expected a number, got '" + v + "'");
    return out;
}

long to_long(const std::string& key, const std::string& v) {
    long out = 0;
    const char* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end || v.empty()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return out;
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_double(key, item));
    }
    return out;
}

}  // namespace

Scenario parse_scenario(const std::string& name) {
    static const std::map<std::string, Scenario> m = {
        {"evolve", Scenario::Evolve},       {"solve-profile", Scenario::SolveProfile},
        {"sweep-eps", Scenario::SweepEps},  {"sweep-rho", Scenario::SweepRho},
        {"verify", Scenario::Verify},       {"oracle", Scenario::Oracle},
    };
    auto it = m.find(name);
    if (it == m.end()) throw ConfigError("unknown scenario '" + name + "'");
    return it->second;
}

std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::Evolve: return "evolve";
        case Scenario::SolveProfile: return "solve-profile";
        case Scenario::SweepEps: return "sweep-eps";
        case Scenario::SweepRho: return "sweep-rho";
        case Scenario::Verify: return "verify";
        case Scenario::Oracle: return "oracle";
    }
    return "?";
}

RunSpec parse_config(const std::string& text, const std::vector<std::pair<std::string, std::string>>& overrides) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax: ") + e.what());
    }

    std::map<std::string, std::string> given;
    std::vector<std::string> unknown;
    auto known = [](const std::string& k) {
        for (const auto& d : schema())
            if (k == d.key) return true;
        return false;
    };
    for (const auto& [section, sub] : tree) {
        if (sub.empty() && !sub.data().empty()) {
            unknown.push_back(section);
            continue;
        }
        for (const auto& [key, val] : sub) {
            const std::string full = section + "." + key;
            if (!known(full)) unknown.push_back(full);
            given[full] = trim(val.data());
        }
    }
    for (const auto& [k, v] : overrides) {
        if (!known(k)) unknown.push_back(k);
        given[k] = trim(v);
    }
    if (!unknown.empty()) {
        std::string msg = "unknown key";
        msg += unknown.size() > 1 ? "s: " : ": ";
        for (std::size_t i = 0; i < unknown.size(); ++i) msg += (i ? ", " : "") + unknown[i];
        throw ConfigError(msg);
    }

    RunSpec spec;
    std::map<std::string, std::string> v;
    for (const auto& d : schema()) {
        auto it = given.find(d.key);
        if (it != given.end()) {
            v[d.key] = it->second;
        } else if (d.fallback) {
            v[d.key] = d.fallback;
        } else {
            throw ConfigError(std::string("missing required key ") + d.key);
        }
        spec.resolved.emplace_back(d.key, v[d.key]);
    }

    spec.scenario = parse_scenario(v["run.scenario"]);
    spec.oracle = v["run.oracle"];
    spec.out_dir = v["run.out"];
    spec.seed = static_cast<std::uint64_t>(to_long("run.seed", v["run.seed"]));
    spec.workers = static_cast<int>(to_long("run.workers", v["run.workers"]));

    spec.coeffs.lambda = to_double("coefficients.lambda", v["coefficients.lambda"]);
    spec.coeffs.alpha = to_double("coefficients.alpha", v["coefficients.alpha"]);
    spec.coeffs.K0 = to_double("coefficients.K0", v["coefficients.K0"]);
    spec.coeffs.a0 = to_double("coefficients.a0", v["coefficients.a0"]);

    spec.daughter_kind = v["daughter.kind"];
    if (spec.daughter_kind != "power" && spec.daughter_kind != "table")
        throw ConfigError("daughter.kind must be power or table");
    spec.nu = to_double("daughter.nu", v["daughter.nu"]);
    spec.daughter_file = v["daughter.file"];
    if (spec.daughter_kind == "table" && spec.daughter_file.empty())
        throw ConfigError("missing required key daughter.file for a tabulated daughter");
    spec.eps = to_double("daughter.eps", v["daughter.eps"]);
    if (!(spec.eps >= 0.0 && spec.eps < 1.0)) throw ConfigError("daughter.eps must lie in [0, 1)");

    spec.xmin = to_double("grid.xmin", v["grid.xmin"]);
    spec.xmax = to_double("grid.xmax", v["grid.xmax"]);
    spec.n_cells = static_cast<int>(to_long("grid.n_cells", v["grid.n_cells"]));
    if (!(spec.xmin > 0.0 && spec.xmax > spec.xmin)) throw ConfigError("grid bounds must satisfy 0 < xmin < xmax");
    if (spec.n_cells < 8) throw ConfigError("grid.n_cells must be at least 8");

    const std::string mode = v["solver.mode"];
    if (mode == "physical")
        spec.mode = Mode::Physical;
    else if (mode == "rescaled")
        spec.mode = Mode::Rescaled;
    else
        throw ConfigError("solver.mode must be physical or rescaled");
    const bool profile_run = spec.scenario == Scenario::SolveProfile || spec.scenario == Scenario::SweepEps ||
                             spec.scenario == Scenario::SweepRho;
    // Profile searches run long in s on stiff grids; they default to the implicit-in-loss scheme.
    std::string integ = v["solver.integrator"];
    if (integ == "auto") integ = profile_run ? "patankar" : "heun";
    if (integ == "heun")
        spec.integrator = Integrator::Heun;
    else if (integ == "patankar")
        spec.integrator = Integrator::Patankar;
    else
        throw ConfigError("solver.integrator must be heun or patankar");
    const std::string rec = v["solver.reconstruction"];
    if (rec == "upwind")
        spec.reconstruction = Reconstruction::Upwind;
    else if (rec == "vanleer")
        spec.reconstruction = Reconstruction::VanLeer;
    else
        throw ConfigError("solver.reconstruction must be upwind or vanleer");
    spec.horizon = to_double("solver.horizon", v["solver.horizon"]);
    spec.cfl = to_double("solver.cfl", v["solver.cfl"]);
    spec.dt = to_double("solver.dt", v["solver.dt"]);
    spec.snapshot_every = to_double("solver.snapshot_every", v["solver.snapshot_every"]);
    spec.steady_tol = to_double("solver.steady_tol", v["solver.steady_tol"]);
    spec.max_clip_mass = to_double("solver.max_clip_mass", v["solver.max_clip_mass"]);
    if (!(spec.cfl > 0.0 && spec.cfl < 1.0)) throw ConfigError("solver.cfl must lie in (0, 1)");
    if (!(spec.horizon > 0.0)) throw ConfigError("solver.horizon must be positive");
    if (!(spec.snapshot_every > 0.0)) throw ConfigError("solver.snapshot_every must be positive");
    if (spec.integrator == Integrator::Patankar && spec.dt == 0.0 && profile_run) spec.dt = 0.05;
    if (spec.integrator == Integrator::Patankar && !(spec.dt > 0.0))
        throw ConfigError("solver.dt must be positive for the patankar integrator");

    spec.initial_rho = to_double("initial.rho", v["initial.rho"]);
    if (!(spec.initial_rho >= 0.0)) throw ConfigError("initial.rho must be non-negative");
    spec.s_max = to_double("profile.s_max", v["profile.s_max"]);
    spec.eps_list = to_list("profile.eps_list", v["profile.eps_list"]);
    spec.rho_list = to_list("profile.rho_list", v["profile.rho_list"]);
    spec.xlogx_samples = to_long("verify.xlogx_samples", v["verify.xlogx_samples"]);

    switch (spec.scenario) {
        case Scenario::SolveProfile:
        case Scenario::SweepEps:
            if (v["profile.rho"].empty()) throw ConfigError("missing required key profile.rho");
            break;
        case Scenario::SweepRho:
            if (spec.rho_list.empty()) throw ConfigError("missing required key profile.rho_list");
            break;
        case Scenario::Oracle:
            if (spec.oracle.empty()) throw ConfigError("missing required key run.oracle");
            if (spec.oracle != "fragmentation" && spec.oracle != "constant-kernel")
                throw ConfigError("unknown oracle '" + spec.oracle + "' (fragmentation, constant-kernel)");
            break;
        default: break;
    }
    if (spec.scenario == Scenario::SweepEps && spec.eps_list.empty())
        throw ConfigError("missing required key profile.eps_list");
    if (!v["profile.rho"].empty()) spec.rho = to_double("profile.rho", v["profile.rho"]);

    // Oracles and property suites use their own fixed coefficient sets.
    if (spec.scenario != Scenario::Oracle && spec.scenario != Scenario::Verify) {
        DaughterPtr d;
        try {
            d = make_daughter(spec);
        } catch (const InputError& e) {
            throw ConfigError(std::string("daughter: ") + e.what());
        }
        const auto violations = validate(spec.coeffs, *d);
        if (!violations.empty()) {
            std::string msg = "inadmissible coefficients: ";
            for (std::size_t i = 0; i < violations.size(); ++i) msg += (i ? "; " : "") + violations[i];
            throw ConfigError(msg);
        }
    }
    for (auto& [k, val] : spec.resolved) {
        if (k == "solver.integrator") val = spec.integrator == Integrator::Heun ? "heun" : "patankar";
        if (k == "solver.dt") val = fmt(spec.dt);
    }
    return spec;
}

RunSpec load_config(const std::string& path, const std::vector<std::pair<std::string, std::string>>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), overrides);
}

DaughterPtr make_daughter(const RunSpec& spec) {
    if (spec.daughter_kind == "table") return load_daughter_csv(spec.daughter_file, spec.nu);
    return std::make_shared<PowerDaughter>(spec.nu);
}

}  // namespace cfselfsim
