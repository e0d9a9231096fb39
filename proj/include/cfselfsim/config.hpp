#pragma once

#include "cfselfsim/coefficients.hpp"
#include "cfselfsim/dynamics.hpp"
#include "cfselfsim/operators.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cfselfsim {

// Configuration problems: unknown or missing keys, bad values, inadmissible coefficients.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Scenario { Evolve, SolveProfile, SweepEps, SweepRho, Verify, Oracle };

struct RunSpec {
    Scenario scenario = Scenario::Evolve;
    std::string oracle;  // fragmentation | constant-kernel

    CoefficientSet coeffs;
    std::string daughter_kind = "power";  // power | table
    double nu = 0.0;
    std::string daughter_file;
    double eps = 0.0;

    double xmin = 1e-6;
    double xmax = 1e3;
    int n_cells = 256;

    Mode mode = Mode::Physical;
    Integrator integrator = Integrator::Heun;
    Reconstruction reconstruction = Reconstruction::VanLeer;
    double horizon = 1.0;
    double cfl = 0.9;
    double dt = 0.0;
    double snapshot_every = 0.1;
    double steady_tol = 1e-8;
    double max_clip_mass = -1.0;

    double initial_rho = 1.0;  // evolve: initial condition rho e^{-x}
    double rho = 0.0;          // profiles: target mass
    double s_max = 30.0;
    std::vector<double> eps_list;
    std::vector<double> rho_list;

    long xlogx_samples = 100000;
    std::string out_dir = "runs";
    std::uint64_t seed = 1;
    int workers = 0;

    // Every resolved key as section.key = value, in a fixed order.
    std::vector<std::pair<std::string, std::string>> resolved;
};

Scenario parse_scenario(const std::string& name);
std::string scenario_name(Scenario s);

// INI text with sections [run], [coefficients], [daughter], [grid], [solver],
// [profile], [verify]. Overrides are section.key = value pairs applied on top.
RunSpec parse_config(const std::string& text,
                     const std::vector<std::pair<std::string, std::string>>& overrides = {});
RunSpec load_config(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& overrides = {});

// Builds the daughter described by `spec` (unmollified).
DaughterPtr make_daughter(const RunSpec& spec);

}  // namespace cfselfsim
