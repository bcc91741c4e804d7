// fndam: run FN-DAM experiments and write their CSV datasets.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fndam/experiments.hpp"

namespace {

struct Args {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> experiment;
};

void add_common(CLI::App* cmd, Args& a) {
    cmd->add_option("--config", a.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--seed", a.seed, "Override experiment.seeds with a single seed");
    cmd->add_option("--out", a.out, "Output root directory (overrides output_dir)");
    cmd->add_option("--experiment", a.experiment, "Experiment name within the command");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FN-DAM device and learning simulator"};
    app.set_version_flag("--version", std::string(fndam::kToolVersion));
    app.require_subcommand(1);

    Args args;
    const char* commands[][2] = {
        {"calibrate", "Fit k1/k2 to the three operating regimes and write the device block"},
        {"characterize", "Regime traces, bidirectional sequence, pulse splitting, amplitude/count sweeps, common mode"},
        {"energy-report", "Write energy per update over the configured horizon"},
        {"retention-report", "Retention time vs bias voltage and vs time after initialization"},
        {"train", "Perceptron (default) or network-decay training"},
    };
    for (const auto& [name, help] : commands) {
        add_common(app.add_subcommand(name, help), args);
    }

    std::string command = "fndam";
    try {
        app.parse(argc, argv);
        command = app.get_subcommands().front()->get_name();
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        nlohmann::json rec{{"status", "error"}, {"command", command}, {"kind", "usage"},
                           {"message", e.what()}, {"path", nullptr}};
        std::cerr << rec.dump() << '\n';
        return 2;
    }

    try {
        const fndam::RunResult r = fndam::run_command({command, args.config, args.seed, args.out, args.experiment});
        nlohmann::json ok{{"status", "ok"}, {"command", command}, {"directory", r.directory.string()},
                          {"files", r.files}};
        std::cout << ok.dump() << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << fndam::error_record(command, e).dump() << '\n';
        return 1;
    }
}
