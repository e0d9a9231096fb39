#include "catch_amalgamated.hpp"

#include "cfselfsim/config.hpp"

using namespace cfselfsim;

namespace {

const char* kMinimal = R"(
[run]
scenario = solve-profile
[coefficients]
lambda = 2
alpha = 1
K0 = 1
a0 = 1
[daughter]
nu = 0
eps = 0.01
[grid]
xmin = 1e-6
xmax = 1e3
n_cells = 256
[profile]
rho = 0.18
)";

std::string error_of(const std::string& text, std::vector<std::pair<std::string, std::string>> ov = {}) {
    try {
        parse_config(text, ov);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("minimal profile config") {
    const RunSpec s = parse_config(kMinimal);
    CHECK(s.scenario == Scenario::SolveProfile);
    CHECK(s.rho == 0.18);
    CHECK(s.eps == 0.01);
    CHECK(s.n_cells == 256);
    CHECK(s.integrator == Integrator::Patankar);
    CHECK(s.dt > 0.0);
    CHECK_FALSE(s.resolved.empty());
}

TEST_CASE("inadmissible coefficients are rejected") {
    const std::string msg = error_of(kMinimal, {{"coefficients.alpha", "0.4"}});
    CHECK(msg.find("alpha") != std::string::npos);
}

TEST_CASE("unknown keys are listed") {
    CHECK(error_of(std::string(kMinimal) + "foo = 1\n").find("profile.foo") != std::string::npos);
    CHECK(error_of(kMinimal, {{"foo", "1"}}).find("foo") != std::string::npos);
}

TEST_CASE("missing keys and type mismatches") {
    CHECK(error_of("[grid]\nn_cells = 64\n").find("run.scenario") != std::string::npos);
    CHECK(error_of("[run]\nscenario = solve-profile\n").find("profile.rho") != std::string::npos);
    CHECK(error_of(kMinimal, {{"grid.n_cells", "many"}}).find("grid.n_cells") != std::string::npos);
    CHECK(error_of(kMinimal, {{"solver.mode", "sideways"}}).find("solver.mode") != std::string::npos);
    CHECK(error_of("[run]\nscenario = oracle\noracle = other\n").find("oracle") != std::string::npos);
}

TEST_CASE("overrides win over the file") {
    const RunSpec s = parse_config(kMinimal, {{"grid.n_cells", "64"}, {"run.scenario", "evolve"}});
    CHECK(s.n_cells == 64);
    CHECK(s.scenario == Scenario::Evolve);
    CHECK(s.integrator == Integrator::Heun);
}
