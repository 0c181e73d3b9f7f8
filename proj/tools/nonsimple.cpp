#include <iostream>

#include <CLI11.hpp>

#include "nonsimple/app.hpp"
#include "nonsimple/errors.hpp"

using namespace nonsimple;

int main(int argc, char** argv) {
    CLI::App app{"Second-gradient elastic surface solver"};
    app.require_subcommand(1);

    std::string config_path;
    bool allow_noncoercive = false;
    bool skip_check = false;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::string param;
    std::vector<double> values;
    bool compare_flat = false;
    std::uint64_t check_seed = 1;

    auto* check = app.add_subcommand("check", "Validate the configured density");
    check->add_option("--config", config_path, "RunConfig JSON")->required();
    check->add_flag("--allow-noncoercive", allow_noncoercive);
    check->add_option("--seed", check_seed, "sampling seed");

    auto* run = app.add_subcommand("run", "Solve one scenario and write artifacts");
    run->add_option("--config", config_path, "RunConfig JSON")->required();
    auto* out_opt = run->add_option("--out", out_dir, "output directory");
    auto* seed_opt = run->add_option("--seed", seed, "perturbation seed");
    run->add_flag("--allow-noncoercive", allow_noncoercive);
    run->add_flag("--skip-check", skip_check, "solve even if the density checks fail");

    auto* sweep = app.add_subcommand("sweep", "Continuation over one numeric config entry");
    sweep->add_option("--config", config_path, "RunConfig JSON")->required();
    sweep->add_option("--param", param, "dotted path, e.g. material.c_b or loads.b.2")
        ->required();
    sweep->add_option("--values", values, "comma-separated values")->required()->delimiter(',');
    auto* sweep_out = sweep->add_option("--out", out_dir, "output directory");
    auto* sweep_seed = sweep->add_option("--seed", seed, "perturbation seed");
    sweep->add_flag("--allow-noncoercive", allow_noncoercive);
    sweep->add_flag("--skip-check", skip_check);
    sweep->add_flag("--compare-flat", compare_flat, "also record the e3-frozen energy per step");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (*check) {
            const RunConfig cfg = load_config(config_path);
            const CheckOutcome out = cmd_check(cfg, allow_noncoercive, check_seed);
            std::cout << out.report.dump(2) << '\n';
            for (const auto& m : out.report["messages"])
                std::cerr << "check failed: " << m.get<std::string>() << '\n';
            return out.exit_code;
        }

        RunOptions ro;
        ro.allow_noncoercive = allow_noncoercive;
        ro.skip_check = skip_check;
        if (*run) {
            if (*out_opt)
                ro.out_dir = out_dir;
            if (*seed_opt)
                ro.seed = seed;
            return cmd_run(load_config(config_path), ro, std::cerr);
        }

        if (*sweep_out)
            ro.out_dir = out_dir;
        if (*sweep_seed)
            ro.seed = seed;
        const std::filesystem::path path(config_path);
        return cmd_sweep(read_json_file(path), path.parent_path(), param, values,
                         {ro, compare_flat}, std::cerr);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const InfeasibleStart& e) {
        std::cerr << "infeasible start: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}
