#include "commands.hpp"

#include <ostream>
#include <stdexcept>
#include <thread>

#include "tlsdyn/dataset_io.hpp"

namespace tlsdyn::cli {

std::ofstream open_output(Context& ctx, const std::string& relative) {
    const auto path = ctx.out_path(relative);
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot create " + path.string());
    ctx.manifest.add_output(relative);
    return out;
}

diffusion::SimConfig read_sim_config(Config& config, std::uint64_t seed, const diffusion::SimConfig& defaults) {
    diffusion::SimConfig sim = defaults;
    sim.rng_seed = seed;
    const auto dims = config.numbers("cuboid_dims_nm", {defaults.cuboid_dims_nm.begin(), defaults.cuboid_dims_nm.end()});
    if (dims.size() != 3) config.fail("cuboid_dims_nm", "expected three lengths in nm");
    for (std::size_t i = 0; i < 3; ++i) sim.cuboid_dims_nm[i] = dims[i];
    sim.tf_density = config.number("tf_density", defaults.tf_density);
    sim.energy_bandwidth = config.number("energy_bandwidth", defaults.energy_bandwidth);
    sim.p_max = config.number("p_max", defaults.p_max);
    sim.eps_r = config.number("eps_r", defaults.eps_r);
    sim.dt = config.number("dt", defaults.dt);
    sim.t_sim = config.number("t_sim", defaults.t_sim);
    sim.gamma_min = config.maybe_number("gamma_min");
    if (!sim.gamma_min) sim.gamma_min = defaults.gamma_min;
    sim.gamma_max = config.maybe_number("gamma_max");
    if (!sim.gamma_max) sim.gamma_max = defaults.gamma_max;

    const std::string convention = config.text(
        "coupling_convention",
        defaults.coupling_convention == diffusion::CouplingConvention::angular ? "angular" : "ordinary");
    if (convention == "angular") {
        sim.coupling_convention = diffusion::CouplingConvention::angular;
    } else if (convention == "ordinary") {
        sim.coupling_convention = diffusion::CouplingConvention::ordinary;
    } else {
        config.fail("coupling_convention", "expected 'angular' or 'ordinary'");
    }

    try {
        sim.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return sim;
}

int run_command(const std::string& command, const RunOptions& options, std::ostream& out, std::ostream& err) {
    try {
        Config config = options.config_path ? Config::load(*options.config_path) : Config{};
        if (config.manifest_command() && *config.manifest_command() != command) {
            throw ConfigError("manifest was written by '" + *config.manifest_command() + "', not '" + command + "'");
        }
        if (options.seed) config.override_value("seed", YAML::Node(*options.seed));
        if (options.threads) config.override_value("threads", YAML::Node(*options.threads));
        if (options.dataset) config.override_value("dataset", YAML::Node(*options.dataset));
        if (options.mask_ghz) {
            YAML::Node list(YAML::NodeType::Sequence);
            for (double f : *options.mask_ghz) list.push_back(f);
            config.override_value("mask_ghz", list);
        }

        std::filesystem::create_directories(options.out);
        Context ctx{std::move(config), 0, 1, RunManifest(command, options.out), out};
        ctx.seed = ctx.config.unsigned_integer("seed", 0);
        const auto threads = ctx.config.unsigned_integer("threads", 0);
        ctx.threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                   : static_cast<unsigned>(threads);

        int code = kExitOther;
        if (command == "synth") {
            code = cmd_synth(ctx);
        } else if (command == "simulate") {
            code = cmd_simulate(ctx);
        } else if (command == "analyze") {
            code = cmd_analyze(ctx);
        } else if (command == "sweep-density") {
            code = cmd_sweep_density(ctx);
        } else if (command == "constants") {
            code = cmd_constants(ctx);
        } else {
            err << "unknown command '" << command << "'\n";
            return kExitOther;
        }
        const auto manifest = ctx.manifest.write(ctx.config.resolved(), ctx.seed);
        out << "manifest: " << manifest.string() << '\n';
        return code;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const io::DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitOther;
    }
}

}  // namespace tlsdyn::cli
