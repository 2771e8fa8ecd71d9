#include "tlsdyn/diffusion.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tlsdyn/parallel.hpp"

namespace tlsdyn::diffusion {

namespace {

constexpr double kNmPerUm = 1000.0;
constexpr double kProbabilitySlack = 1e-12;

[[noreturn]] void invalid(const std::string& what) {
    throw std::invalid_argument("SimConfig: " + what);
}

}  // namespace

std::size_t SimConfig::steps() const {
    return static_cast<std::size_t>(std::llround(t_sim / dt));
}

double SimConfig::volume_um3() const {
    return cuboid_dims_nm[0] * cuboid_dims_nm[1] * cuboid_dims_nm[2] /
           (kNmPerUm * kNmPerUm * kNmPerUm);
}

void SimConfig::validate() const {
    for (double d : cuboid_dims_nm) {
        if (!(d > 0.0)) invalid("cuboid dimensions must be positive");
    }
    if (!(tf_density >= 0.0)) invalid("tf_density must be >= 0");
    if (!(energy_bandwidth > 0.0)) invalid("energy_bandwidth must be positive");
    if (!(p_max > 0.0)) invalid("p_max must be positive");
    if (!(eps_r >= 1.0)) invalid("eps_r must be >= 1");
    if (!(dt > 0.0)) invalid("dt must be positive");
    if (!(t_sim > 0.0)) invalid("t_sim must be positive");
    const double ratio = t_sim / dt;
    if (std::llround(ratio) < 1 || std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
        invalid("t_sim/dt must be a positive integer step count");
    }
    const double lo = resolved_gamma_min();
    const double hi = resolved_gamma_max();
    if (!(lo > 0.0) || !(lo < hi)) invalid("need 0 < gamma_min < gamma_max");
    if (hi * dt > 1.0 + kProbabilitySlack) invalid("gamma_max must not exceed 1/dt");
}

double sample_flip_rate(double u, double gamma_min, double gamma_max) {
    if (!(gamma_min > 0.0) || !(gamma_min < gamma_max)) {
        throw std::invalid_argument("sample_flip_rate: need 0 < gamma_min < gamma_max");
    }
    if (!(u >= 0.0 && u <= 1.0)) {
        throw std::invalid_argument("sample_flip_rate: u must lie in [0, 1]");
    }
    if (u == 1.0) return gamma_max;
    return gamma_min * std::pow(gamma_max / gamma_min, u);
}

double sample_dipole_magnitude(Engine& rng, double p_max) {
    if (!(p_max > 0.0)) throw std::invalid_argument("sample_dipole_magnitude: p_max must be positive");
    // Accept x with probability √(1 − x²); acceptance rate π/4.
    for (;;) {
        const double x = uniform01(rng);
        const double y = uniform01(rng);
        if (y * y <= 1.0 - x * x) return x * p_max;
    }
}

Eigen::Vector3d sample_unit_vector(Engine& rng) {
    const double z = 2.0 * uniform01(rng) - 1.0;
    const double phi = 2.0 * phys::kPi * uniform01(rng);
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {s * std::cos(phi), s * std::sin(phi), z};
}

double shift_coupling_mhz(const phys::DipoleMoment& tls, const phys::DipoleMoment& tf,
                          const Eigen::Vector3d& position_nm, double eps_r,
                          CouplingConvention convention) {
    const auto coupling = phys::dipole_dipole_gzz(tls, tf, position_nm, eps_r).slow_fluctuator_limit();
    const double g = *coupling.g_parallel_over_h;
    return convention == CouplingConvention::angular ? phys::to_angular(g) : g;
}

Population populate_fluctuators(const SimConfig& config, Engine& rng) {
    config.validate();
    Population pop;
    pop.tls_dipole = phys::DipoleMoment{sample_dipole_magnitude(rng, config.p_max), Eigen::Vector3d::UnitZ()};

    const double mean = config.tf_density * config.volume_um3() * config.energy_bandwidth;
    std::size_t count = 0;
    if (mean > 0.0) {
        std::poisson_distribution<long long> poisson(mean);
        count = static_cast<std::size_t>(poisson(rng));
    }

    const double lo = config.resolved_gamma_min();
    const double hi = config.resolved_gamma_max();
    pop.fluctuators.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Fluctuator f;
        do {
            for (int a = 0; a < 3; ++a) {
                f.position_nm[a] = (uniform01(rng) - 0.5) * config.cuboid_dims_nm[static_cast<std::size_t>(a)];
            }
        } while (f.position_nm.squaredNorm() == 0.0);
        f.dipole = phys::DipoleMoment{sample_dipole_magnitude(rng, config.p_max), sample_unit_vector(rng)};
        f.flip_rate = sample_flip_rate(uniform01(rng), lo, hi);
        f.state = uniform01(rng) < 0.5 ? 1 : -1;
        f.g_parallel_mhz = shift_coupling_mhz(pop.tls_dipole, f.dipole, f.position_nm, config.eps_r,
                                              config.coupling_convention);
        pop.fluctuators.push_back(f);
    }
    return pop;
}

double step(std::span<Fluctuator> fluctuators, double current_offset_mhz, double dt_hr, Engine& rng) {
    double offset = current_offset_mhz;
    for (Fluctuator& f : fluctuators) {
        const double p = f.flip_rate * dt_hr;
        if (p > 1.0 + kProbabilitySlack) {
            throw std::invalid_argument("step: flip probability Γ·dt exceeds 1");
        }
        // One draw per fluctuator per step, flipped or not, keeps streams aligned.
        if (uniform01(rng) < p) {
            const int old_state = f.state;
            f.state = -old_state;
            offset += 2.0 * f.g_parallel_mhz * (f.state - old_state) / 2.0;
        }
    }
    return offset;
}

Trajectory evolve(std::span<Fluctuator> fluctuators, std::size_t steps, double dt_hr, Engine& rng) {
    Trajectory traj = Trajectory::zeros(steps, dt_hr);
    double offset = 0.0;
    for (std::size_t k = 1; k <= steps; ++k) {
        offset = step(fluctuators, offset, dt_hr, rng);
        traj.delta_mhz[k] = offset;
    }
    return traj;
}

Trajectory run_trajectory(const SimConfig& config, std::uint64_t seed) {
    Engine rng = make_engine(seed);
    Population pop = populate_fluctuators(config, rng);
    return evolve(pop.fluctuators, config.steps(), config.dt, rng);
}

std::vector<Trajectory> run_ensemble(const SimConfig& config, std::size_t n_trajectories,
                                     std::uint64_t master_seed, unsigned threads) {
    if (n_trajectories == 0) throw std::invalid_argument("run_ensemble: need at least one trajectory");
    config.validate();
    std::vector<Trajectory> out(n_trajectories);
    parallel_for(n_trajectories, threads, [&](std::size_t k) {
        out[k] = run_trajectory(config, derive_seed(master_seed, k));
    });
    return out;
}

}  // namespace tlsdyn::diffusion
