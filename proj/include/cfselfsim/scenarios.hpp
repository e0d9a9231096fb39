#pragma once

#include "cfselfsim/config.hpp"

#include <string>
#include <vector>

namespace cfselfsim {

inline constexpr const char* kVersion = "1.0.0";

// One analytic comparison: L1(x dx) error of the computed solution at each snapshot.
struct OracleCase {
    std::string label;
    std::vector<double> times;
    std::vector<double> errors;
    long steps = 0;

    double final_error() const { return errors.empty() ? 0.0 : errors.back(); }
};

struct OracleReport {
    std::string name;
    std::vector<OracleCase> cases;
    double tolerance = 0.0;
    double seconds = 0.0;

    bool pass() const;
};

// K0 = 0, a(x) = x, B = 2, f0 = e^{-x}; exact (1+t)^2 e^{-(1+t)x}.
OracleReport fragmentation_oracle(int n_cells = 256, double xmin = 1e-6, double xmax = 1e3, double t_end = 1.0);
// Constant kernels, no fragmentation, f0 = e^{-x}. K = 2 against (1+t)^{-2} e^{-x/(1+t)};
// K = 1 against (2/(2+t))^2 e^{-2x/(2+t)}.
OracleReport constant_kernel_oracle(int n_cells = 256, double xmin = 1e-6, double xmax = 1e3, double t_end = 1.0);

struct SuiteCheck {
    std::string suite;
    std::string check;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

// Sampled check of xlogx_lhs <= xlogx_rhs on (1e-6, 1e6)^2 plus the diagonal equality margin.
std::vector<SuiteCheck> xlogx_suite(long samples, std::uint64_t seed);
// Mollified power daughter (nu = 0) for eps in {0.1, 0.05, 0.025, 0.0125}.
std::vector<SuiteCheck> mollifier_suite();
// Every property suite run by the verify scenario.
std::vector<SuiteCheck> property_suites(long xlogx_samples, std::uint64_t seed);

// Output root: explicit override, else CF_SELFSIM_OUT, else the configured directory.
std::string output_root(const RunSpec& spec, const std::string& override_dir = "");

// Runs the scenario and writes its artifacts under `dir`. Returns 0 on success, 1 on
// scenario failure. Configuration problems surface as ConfigError.
int run(const RunSpec& spec, const std::string& dir);

}  // namespace cfselfsim
