// oraclelab: RF-fingerprinting simulation lab driver.
//
// Subcommands: gen | calibrate | plan | train | eval | report.
// Each takes --config <json> plus --out <dir>; --seed overrides the config
// seed. Exit codes: 0 success, 2 config error, 3 infeasible plan,
// 4 training divergence, 1 anything else.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "experiments.hpp"
#include "oracle/errors.hpp"

namespace {

constexpr int kExitGeneric = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitDiverged = 4;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RF fingerprinting simulation lab"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", dataset_path, model_path, allocation_path;
    std::vector<std::string> report_paths;
    std::optional<uint64_t> seed_override;

    auto add_common = [&](CLI::App* sub, bool needs_config = true) {
        if (needs_config)
            sub->add_option("--config", config_path, "run configuration JSON")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed_override, "override the config seed");
    };

    CLI::App* gen = app.add_subcommand("gen", "generate IQ trace datasets");
    add_common(gen);
    gen->add_option("--allocation", allocation_path,
                    "allocation JSON; devices transmit their assigned impairments");

    CLI::App* calibrate = app.add_subcommand("calibrate", "emulated calibration sweep CSV");
    add_common(calibrate);

    CLI::App* plan = app.add_subcommand("plan", "impairment map, feasible set and allocation");
    add_common(plan);

    CLI::App* train = app.add_subcommand("train", "train the CNN classifier");
    add_common(train);
    train->add_option("--dataset", dataset_path, "dataset file from gen")->required();

    CLI::App* eval = app.add_subcommand("eval", "evaluate a trained model");
    add_common(eval);
    eval->add_option("--model", model_path, "model file from train")->required();
    eval->add_option("--dataset", dataset_path, "dataset file from gen")->required();

    CLI::App* report = app.add_subcommand("report", "aggregate experiment reports");
    report->add_option("--out", out_dir, "output directory");
    report->add_option("reports", report_paths, "experiment report JSON files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;  // bad usage is a configuration problem
    }

    try {
        if (report->parsed()) return oracle::cli::cmd_report(report_paths, out_dir);

        oracle::io::RunConfig cfg = oracle::io::load_config(config_path);
        if (seed_override) {
            cfg.seed = *seed_override;
            oracle::io::validate(cfg);
        }

        if (gen->parsed()) return oracle::cli::cmd_gen(cfg, out_dir, allocation_path);
        if (calibrate->parsed()) return oracle::cli::cmd_calibrate(cfg, out_dir);
        if (plan->parsed()) return oracle::cli::cmd_plan(cfg, out_dir);
        if (train->parsed()) return oracle::cli::cmd_train(cfg, dataset_path, out_dir);
        if (eval->parsed())
            return oracle::cli::cmd_eval(cfg, model_path, dataset_path, out_dir);
    } catch (const oracle::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const oracle::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const oracle::TrainingDiverged& e) {
        std::cerr << "training diverged: " << e.what() << "\n";
        return kExitDiverged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitGeneric;
    }
    return kExitGeneric;
}
