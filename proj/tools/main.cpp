#include "cfselfsim/config.hpp"
#include "cfselfsim/numerics.hpp"
#include "cfselfsim/scenarios.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

using namespace cfselfsim;

namespace {

std::vector<std::pair<std::string, std::string>> split_overrides(const std::vector<std::string>& sets) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects section.key=value, got '" + s + "'");
        out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coagulation-fragmentation solver and self-similar profile search"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    std::string config_path;
    std::vector<std::string> sets;
    std::string out_dir;
    std::string oracle_name;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"evolve", "Evolve the physical or rescaled equation from rho e^{-x}"},
        {"solve-profile", "Compute a self-similar profile by rescaled evolution"},
        {"sweep-eps", "Profiles along a decreasing list of mollification parameters"},
        {"sweep-rho", "Profiles for a list of masses"},
        {"verify", "Run the property suites"},
        {"oracle", "Compare against an analytic solution (fragmentation, constant-kernel)"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        if (name == "oracle") sub->add_option("name", oracle_name, "Oracle name")->required();
        sub->add_option("config", config_path, "INI configuration file");
        sub->add_option("--set", sets, "Override a key: section.key=value (repeatable)");
        sub->add_option("--out", out_dir, "Output directory (overrides CF_SELFSIM_OUT and run.out)");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string scenario = app.get_subcommands().front()->get_name();

    try {
        auto overrides = split_overrides(sets);
        overrides.insert(overrides.begin(), {"run.scenario", scenario});
        if (!oracle_name.empty()) overrides.emplace_back("run.oracle", oracle_name);
        const RunSpec spec = config_path.empty() ? parse_config("", overrides) : load_config(config_path, overrides);

        std::string dir = (std::filesystem::path(output_root(spec, out_dir)) / scenario).string();
        if (spec.scenario == Scenario::Oracle) dir += "-" + spec.oracle;
        const int code = run(spec, dir);
        std::cout << scenario << (code == 0 ? " ok" : " failed") << ": " << dir << '\n';
        return code;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const InputError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "failure: " << e.what() << '\n';
        return 1;
    }
}
