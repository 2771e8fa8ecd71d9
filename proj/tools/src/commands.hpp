#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "manifest.hpp"
#include "tlsdyn/diffusion.hpp"

namespace tlsdyn::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitOther = 1,
    kExitConfig = 2,
    kExitData = 3,
    kExitConvergence = 4,
};

/// Values given on the command line; each overrides the config key of the same name.
struct RunOptions {
    std::optional<std::filesystem::path> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::filesystem::path out = "tlsdyn-out";
    std::optional<std::vector<double>> mask_ghz;  // analyze only
    std::optional<std::string> dataset;           // analyze only
};

/// Shared state of one command invocation.
struct Context {
    Config config;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    RunManifest manifest;
    std::ostream& log;

    std::filesystem::path out_path(const std::string& relative) const { return manifest.out_dir() / relative; }
};

/// Creates `relative` (and parent directories) in the output directory and records it
/// in the manifest. Throws std::runtime_error when the file cannot be created.
std::ofstream open_output(Context& ctx, const std::string& relative);

/// SimConfig keys: cuboid_dims_nm, tf_density, energy_bandwidth, p_max, eps_r, dt, t_sim,
/// gamma_min, gamma_max, coupling_convention (angular | ordinary).
diffusion::SimConfig read_sim_config(Config& config, std::uint64_t seed,
                                     const diffusion::SimConfig& defaults = {});

int cmd_synth(Context& ctx);
int cmd_simulate(Context& ctx);
int cmd_analyze(Context& ctx);
int cmd_sweep_density(Context& ctx);
int cmd_constants(Context& ctx);

/// Loads the config, applies command-line overrides, runs the command, writes the
/// manifest and maps failures to exit codes. Diagnostics go to `err`.
int run_command(const std::string& command, const RunOptions& options, std::ostream& out, std::ostream& err);

}  // namespace tlsdyn::cli
