#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "tlsdyn/version.hpp"

namespace {

struct Flags {
    std::string config;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string out = "tlsdyn-out";
    std::string mask;
    std::string dataset;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "Config file, or a manifest.json from an earlier run");
    cmd->add_option("--seed", f.seed, "Master RNG seed (overrides the config)");
    cmd->add_option("--out", f.out, "Output directory")->capture_default_str();
    cmd->add_option("--threads", f.threads, "Worker threads, 0 for all cores (overrides the config)");
}

}  // namespace

int main(int argc, char** argv) {
    using namespace tlsdyn::cli;

    CLI::App app{"Two-level-system defect simulation and analysis"};
    app.set_version_flag("--version", tlsdyn::kVersion);
    app.require_subcommand(1);

    Flags flags;
    const char* descriptions[][2] = {
        {"synth", "Synthesize a T1(time, frequency) dataset"},
        {"simulate", "Simulate spectral-diffusion trajectories"},
        {"analyze", "Fit, track and characterize defects in a T1 dataset"},
        {"sweep-density", "Diffusivity versus fluctuator density"},
        {"constants", "Print closed-form sanity values"},
    };
    for (const auto& [name, text] : descriptions) {
        CLI::App* cmd = app.add_subcommand(name, text);
        add_common(cmd, flags);
        if (std::string(name) == "analyze") {
            cmd->add_option("dataset", flags.dataset, "Dataset CSV (time_hr,freq_GHz,t1_us)");
            cmd->add_option("--mask", flags.mask, "Comma-separated frequencies in GHz to exclude");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    CLI::App* cmd = app.get_subcommands().front();
    RunOptions options;
    if (!flags.config.empty()) options.config_path = flags.config;
    if (cmd->count("--seed") > 0) options.seed = flags.seed;
    if (cmd->count("--threads") > 0) options.threads = flags.threads;
    options.out = flags.out;
    if (!flags.dataset.empty()) options.dataset = flags.dataset;
    if (cmd->get_name() == "analyze" && cmd->count("--mask") > 0) {
        std::vector<double> mask;
        std::stringstream ss(flags.mask);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                std::size_t used = 0;
                mask.push_back(std::stod(item, &used));
                if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
            } catch (const std::exception&) {
                std::cerr << "config error: --mask: '" << item << "' is not a frequency in GHz\n";
                return kExitConfig;
            }
        }
        options.mask_ghz = mask;
    }
    return run_command(cmd->get_name(), options, std::cout, std::cerr);
}
