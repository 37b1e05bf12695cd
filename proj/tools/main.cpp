#include "resv/errors.hpp"
#include "resv/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kOk = 0;
constexpr int kInternal = 1;
constexpr int kConfig = 2;
constexpr int kDiverged = 3;

struct Invocation {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reservoir synchronisation experiments", "resv-sync"};
    app.require_subcommand(1);
    app.set_version_flag("--version", RESV_VERSION);

    Invocation inv;
    for (auto name : resv::experiments::kCommands) {
        auto* sub = app.add_subcommand(std::string(name), "run the " + std::string(name) + " experiment");
        sub->add_option("--config", inv.config, "JSON config file")->required();
        sub->add_option("--out", inv.out, "output directory (overrides config)");
        sub->add_option("--seed", inv.seed, "base seed (overrides config)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        const auto cfg = resv::experiments::load_config(command, inv.config, inv.out, inv.seed);
        const auto run = resv::experiments::run_experiment(cfg);
        std::cout << command << ": wrote " << run.files.size() + 1 << " files to " << cfg.output_dir << "\n";
        return kOk;
    } catch (const resv::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const resv::DivergenceError& e) {
        std::cerr << "numerical divergence: " << e.what() << "\n";
        return kDiverged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInternal;
    }
}
