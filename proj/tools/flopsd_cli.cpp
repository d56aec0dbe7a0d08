// flopsd - flow-matching lab for on-policy self-distillation of few-step models.
//
// Pipeline: pretrain -> distill -> tune -> eval, plus comparative ablations
// and multi-seed report aggregation. Exit codes: 0 success, 1 usage error,
// 2 numerical failure.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "flopsd/errors.hpp"
#include "flopsd/experiment.hpp"

namespace {

flopsd::RunConfig load_config(const std::string& path) {
    return flopsd::RunConfig::parse_file(path);
}

std::string default_base_path(const flopsd::RunConfig& cfg) {
    return flopsd::resolve_out_dir(cfg) + "/base.ckpt";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flopsd: few-step flow-matching continual-tuning lab"};
    app.require_subcommand(1);

    std::string config_path;
    std::string model_path;
    std::string base_path;
    std::string method = "opsd";
    std::string rundir;

    auto* pretrain = app.add_subcommand("pretrain", "Train the base model (flow matching with context dropout)");
    pretrain->add_option("--config", config_path, "Config file")->required();

    auto* distill = app.add_subcommand("distill", "Distill the base model into a few-step model");
    distill->add_option("--config", config_path, "Config file")->required();
    distill->add_option("--base", base_path, "Base checkpoint (default <out_dir>/base.ckpt)");

    auto* tune = app.add_subcommand("tune", "Run one continual-tuning arm on a checkpoint");
    tune->add_option("--config", config_path, "Config file")->required();
    tune->add_option("--model", model_path, "Checkpoint to tune")->required();
    tune->add_option("--method", method, "opsd | sft | sft-teacher | offpolicy")->required();
    tune->add_option("--base", base_path, "Reference checkpoint for metrics (default <out_dir>/base.ckpt)");

    auto* eval = app.add_subcommand("eval", "Evaluate all metrics for a checkpoint");
    eval->add_option("--config", config_path, "Config file")->required();
    eval->add_option("--model", model_path, "Checkpoint to evaluate")->required();
    eval->add_option("--base", base_path, "Reference checkpoint for metrics (default <out_dir>/base.ckpt)");

    auto* ablate = app.add_subcommand("ablate", "Run all tuning arms plus the teacher-mode sweep on shared seeds");
    ablate->add_option("--config", config_path, "Config file")->required();

    auto* report = app.add_subcommand("report", "Aggregate multi-seed CSVs into median/IQR tables");
    report->add_option("--rundir", rundir, "Run directory with curve CSVs")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(pretrain)) {
            return flopsd::cli_pretrain(load_config(config_path));
        }
        if (app.got_subcommand(distill)) {
            const auto cfg = load_config(config_path);
            if (base_path.empty()) base_path = default_base_path(cfg);
            return flopsd::cli_distill(cfg, base_path);
        }
        if (app.got_subcommand(tune)) {
            const auto cfg = load_config(config_path);
            if (base_path.empty()) base_path = default_base_path(cfg);
            return flopsd::cli_tune(cfg, model_path, base_path, method);
        }
        if (app.got_subcommand(eval)) {
            const auto cfg = load_config(config_path);
            if (base_path.empty()) base_path = default_base_path(cfg);
            return flopsd::cli_eval(cfg, model_path, base_path);
        }
        if (app.got_subcommand(ablate)) {
            return flopsd::cli_ablate(load_config(config_path));
        }
        if (app.got_subcommand(report)) {
            return flopsd::cli_report(rundir);
        }
    } catch (const flopsd::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const flopsd::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
