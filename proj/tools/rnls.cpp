// Command-line surface for the rnls library. One subcommand per experiment:
//   solve solve-energy sweep rates omega-c loop scan tf lambda0 info
// Configuration comes from an optional sectioned key-value file plus repeated
// --set section.key=value overrides. Exit codes: 0 success, 1 solver
// non-convergence or runtime failure, 2 configuration error.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rnls/rnls.hpp"

namespace {

std::string read_text_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw rnls::ConfigError("cannot open config file: " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rnls: action and energy ground states of the rotating defocusing NLS"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "sectioned key-value configuration file");
    app.add_option("--set", overrides, "override: section.key=value (repeatable)");

    const std::vector<std::string> subnames = {"solve", "solve-energy", "sweep",  "rates",
                                               "omega-c", "loop",        "scan",  "tf",
                                               "lambda0", "info"};
    for (const auto& name : subnames) app.add_subcommand(name);

    CLI11_PARSE(app, argc, argv);
    const std::string sub = app.get_subcommands().front()->get_name();

    try {
        std::string text;
        if (!config_path.empty()) text = read_text_file(config_path);
        // the subcommand is authoritative for the experiment type
        std::vector<std::string> ov = overrides;
        ov.insert(ov.begin(), "experiment.type=" + sub);
        rnls::RunConfig rc = rnls::parse_config(text, ov);
        return rnls::run_experiment(rc, std::cout, std::cerr);
    } catch (const rnls::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const rnls::ParameterDomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const rnls::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
