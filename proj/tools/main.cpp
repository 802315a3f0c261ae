#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oscilap/cli.hpp"

namespace {

std::vector<double> parse_lambda_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ladders of positive solutions for a nonlocal oscillatory problem"};
    app.require_subcommand(1);

    std::string config_path, out_dir, lambda_csv;
    bool have_seed = false;
    unsigned long long seed = 0;
    bool dump_matrix = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "path to the JSON config")->required();
        sub->add_option("--out", out_dir, "output directory (overrides the config)");
        sub->add_option("--seed", seed, "RNG seed override")
            ->each([&](const std::string&) { have_seed = true; });
    };

    CLI::App* assemble = app.add_subcommand("assemble-check", "assemble and validate the forms");
    add_common(assemble);
    assemble->add_flag("--dump-matrix", dump_matrix, "write the stiffness matrix as CSV");
    CLI::App* ladder = app.add_subcommand("ladder", "run the truncation ladder pipeline");
    add_common(ladder);
    CLI::App* sweep = app.add_subcommand("sweep", "rerun the ladder over a lambda list");
    add_common(sweep);
    sweep->add_option("--lambda-list", lambda_csv, "comma-separated lambda values");
    CLI::App* verify = app.add_subcommand("verify", "run the full property suite");
    add_common(verify);

    CLI11_PARSE(app, argc, argv);

    oscilap::RunConfig cfg;
    try {
        cfg = oscilap::load_config(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (have_seed) cfg.ladder.solver.rng_seed = seed;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return oscilap::kExitConfigError;
    }

    try {
        if (assemble->parsed()) return oscilap::cmd_assemble_check(cfg, dump_matrix);
        if (ladder->parsed()) return oscilap::cmd_ladder(cfg);
        if (sweep->parsed()) return oscilap::cmd_sweep(cfg, parse_lambda_list(lambda_csv));
        if (verify->parsed()) return oscilap::cmd_verify(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return oscilap::kExitNumericalFailure;
    }
    return oscilap::kExitConfigError;
}
