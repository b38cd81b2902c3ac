#include "degsde/cli.hpp"
#include "degsde/error.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace degsde;
    CLI::App app{"degsde: degenerate SDE experiments"};
    app.require_subcommand(1);

    std::string run_path, validate_path;
    bool csv = false;
    auto* run = app.add_subcommand("run", "run the experiment described by a config file");
    run->add_option("config", run_path, "config file")->required();
    auto* list = app.add_subcommand("list-scenarios", "print the built-in scenarios and their anchors");
    list->add_flag("--csv", csv, "machine-readable output");
    auto* validate = app.add_subcommand("validate", "check a config without running it");
    validate->add_option("config", validate_path, "config file")->required();

    CLI11_PARSE(app, argc, argv);

    if (*list) {
        std::cout << (csv ? cli::scenarios_csv() : cli::scenarios_text());
        return 0;
    }
    if (*validate) {
        try {
            auto cfg = cli::load_config(validate_path);
            cli::validate_config(cfg);
            auto ex = cli::build_model(cfg);
            model::require_hypotheses(ex.model);
        } catch (const ConfigError& e) {
            std::cerr << "invalid config: " << e.what() << "\n";
            return 2;
        } catch (const HypothesisViolation& e) {
            std::cerr << "hypothesis violated: " << e.what() << "\n";
            return 3;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
        std::cout << "ok\n";
        return 0;
    }
    auto res = cli::run_file(run_path);
    for (const auto& l : res.summary) std::cout << l << "\n";
    for (const auto& f : res.files) std::cout << "wrote " << f << "\n";
    if (res.exit_code != 0) std::cerr << res.message << "\n";
    return res.exit_code;
}
