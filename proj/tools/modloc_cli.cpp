#include <cstdio>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "modloc/suites.hpp"

namespace {

constexpr int exit_pass = 0;
constexpr int exit_fail = 1;
constexpr int exit_usage = 2;

void summarize(const modloc::Report& r, const std::string& dir) {
    for (const auto& c : r.records) {
        std::cout << (c.pass ? "PASS " : "FAIL ") << std::left << std::setw(40) << c.name << std::right
                  << std::setprecision(3) << std::scientific << c.value << " " << c.comparison << " " << c.threshold;
        if (c.expected_violation) std::cout << "  (violation expected)";
        std::cout << "\n";
    }
    std::cout << std::defaultfloat << r.records.size() - r.failures() << "/" << r.records.size()
              << " checks passed; report written to " << dir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical checks of modular localization for a scalar free field in 1+1 dimensions"};
    app.require_subcommand(1);

    std::string config_path, out_dir, ladder_text;
    std::optional<unsigned long long> seed;

    auto* run = app.add_subcommand("run", "run every check selected by the config");
    run->add_option("--config", config_path, "YAML experiment config")->required();
    run->add_option("--seed", seed, "override the config seed");
    run->add_option("--out", out_dir, "output directory (default: output_dir of the config)");

    auto* refine = app.add_subcommand("refine", "rerun the resolution-dependent checks on a ladder of grids");
    refine->add_option("--config", config_path, "YAML experiment config")->required();
    refine->add_option("--ladder", ladder_text, "comma separated n_points of freefield.grid, e.g. 512,1024,2048")
        ->required();
    refine->add_option("--seed", seed, "override the config seed");
    refine->add_option("--out", out_dir, "output directory (default: output_dir of the config)");

    auto* list = app.add_subcommand("list-checks", "print every registered check");
    auto* schema = app.add_subcommand("print-schema", "print the config schema and the default config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (list->parsed()) {
            std::cout << "criterion,name,suite,refinement_sensitive,statement\n";
            for (const auto& c : modloc::check_registry())
                std::cout << c.criterion << "," << c.name << "," << c.suite << ","
                          << (c.refinement_sensitive ? "yes" : "no") << ",\"" << c.anchor << "\"\n";
            return exit_pass;
        }
        if (schema->parsed()) {
            std::cout << modloc::schema_text();
            return exit_pass;
        }

        modloc::ExperimentConfig cfg = modloc::load_config(config_path);
        if (seed) cfg.seed = *seed;
        if (out_dir.empty()) out_dir = cfg.output_dir;

        modloc::Report r;
        if (run->parsed()) {
            r = modloc::run_experiment(cfg);
        } else {
            r = modloc::refine_experiment(cfg, modloc::parse_ladder(ladder_text));
        }
        modloc::write_report(r, out_dir);
        summarize(r, out_dir);
        return r.pass() ? exit_pass : exit_fail;
    } catch (const modloc::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return exit_fail;
    }
}
