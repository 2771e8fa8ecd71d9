// Monte Carlo simulation of TLS spectral diffusion driven by a bath of
// thermal fluctuators (TFs) in a thin dielectric film.
//
// A TLS sits at the center of a cuboid populated with TFs. Each TF carries a random
// dipole, a telegraph flip rate drawn from a 1/Γ density on [Γ_min, Γ_max], and a binary
// state. Every time step each TF flips with probability Γ·dt, and each flip moves the
// TLS transition frequency by ±2g∥.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "tlsdyn/physmodel.hpp"
#include "tlsdyn/rng.hpp"
#include "tlsdyn/trajectory.hpp"

namespace tlsdyn::diffusion {

/// How the dipole–dipole energy is turned into a frequency shift.
/// angular: shift per flip = 2·g∥/ħ (reported in MHz), which is how the measured jump
///          amplitudes are related to couplings in the experiment this model describes.
/// ordinary: shift per flip = 2·g∥/h.
enum class CouplingConvention { angular, ordinary };

struct SimConfig {
    std::array<double, 3> cuboid_dims_nm{3.0, 1000.0, 1000.0};
    double tf_density = 1e4;          // GHz⁻¹ μm⁻³
    double energy_bandwidth = 1.0;    // GHz of TF energies counted per unit density
    double p_max = 1.5;               // e Å
    double eps_r = 10.0;
    double dt = 0.25;                 // hours
    double t_sim = 30.0;              // hours
    std::optional<double> gamma_min;  // hr⁻¹, default 1/(2 t_sim)
    std::optional<double> gamma_max;  // hr⁻¹, default 1/dt
    std::uint64_t rng_seed = 0;
    CouplingConvention coupling_convention = CouplingConvention::angular;

    double resolved_gamma_min() const { return gamma_min.value_or(1.0 / (2.0 * t_sim)); }
    double resolved_gamma_max() const { return gamma_max.value_or(1.0 / dt); }
    std::size_t steps() const;
    double volume_um3() const;
    /// Throws std::invalid_argument on any violated invariant
    /// (0 < Γ_min < Γ_max ≤ 1/dt, integral t_sim/dt, positive geometry, ...).
    void validate() const;
};

struct Fluctuator {
    Eigen::Vector3d position_nm = Eigen::Vector3d::Zero();  // relative to the cuboid center
    phys::DipoleMoment dipole;
    double flip_rate = 0.0;         // hr⁻¹
    int state = 1;                  // ±1
    double g_parallel_mhz = 0.0;    // half the frequency jump one flip produces
};

/// The central TLS dipole together with its bath.
struct Population {
    phys::DipoleMoment tls_dipole;
    std::vector<Fluctuator> fluctuators;
};

/// Inverse-CDF sample of the normalized 1/Γ density: Γ_min (Γ_max/Γ_min)^u.
/// Throws std::invalid_argument unless 0 < Γ_min < Γ_max and 0 ≤ u ≤ 1.
double sample_flip_rate(double u, double gamma_min, double gamma_max);

/// Magnitude from the density ∝ √(1 − (p/p_max)²) on [0, p_max], by rejection.
double sample_dipole_magnitude(Engine& rng, double p_max);

/// Uniform direction on the unit sphere.
Eigen::Vector3d sample_unit_vector(Engine& rng);

/// Half the jump a flip of a TF at `position_nm` produces on the central TLS, in MHz,
/// using g∥ ≈ g_zz for slow fluctuators.
double shift_coupling_mhz(const phys::DipoleMoment& tls, const phys::DipoleMoment& tf,
                          const Eigen::Vector3d& position_nm, double eps_r,
                          CouplingConvention convention);

/// Poisson number of TFs with mean density × volume × bandwidth, uniform positions,
/// isotropic orientations, random initial states. The TLS dipole points along the
/// third (in-plane) cuboid axis.
Population populate_fluctuators(const SimConfig& config, Engine& rng);

/// Advances every fluctuator by one step of length dt_hr and returns the new offset.
/// Throws std::invalid_argument if any Γ·dt exceeds 1.
double step(std::span<Fluctuator> fluctuators, double current_offset_mhz, double dt_hr, Engine& rng);

/// Evolves an explicit bath for `steps` steps starting from ΔE = 0.
Trajectory evolve(std::span<Fluctuator> fluctuators, std::size_t steps, double dt_hr, Engine& rng);

/// One trajectory of t_sim/dt + 1 samples with a freshly populated bath. The seed fully
/// determines the result.
Trajectory run_trajectory(const SimConfig& config, std::uint64_t seed);

/// Trajectory k uses run_trajectory(config, derive_seed(master_seed, k)), so the result
/// does not depend on the thread count.
std::vector<Trajectory> run_ensemble(const SimConfig& config, std::size_t n_trajectories,
                                     std::uint64_t master_seed, unsigned threads = 1);

}  // namespace tlsdyn::diffusion
