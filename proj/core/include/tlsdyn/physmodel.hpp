// Closed-form tunneling-defect physics
//
// Unit conventions used throughout tlsdyn:
//   * energies are stored as frequencies, E/h in GHz
//   * couplings are stored as g/h in MHz
//   * wall-clock time is in hours, decay-curve time in microseconds
//   * dipole moments are in e·Å, lengths in nm unless a name says otherwise

#pragma once

#include <optional>

#include <Eigen/Core>

namespace tlsdyn::phys {

/// CODATA 2018 exact/recommended values, SI units.
struct PhysicalConstants {
    static constexpr double planck_h = 6.62607015e-34;            // J s
    static constexpr double reduced_planck_hbar = 1.054571817e-34; // J s
    static constexpr double boltzmann_kB = 1.380649e-23;          // J/K
    static constexpr double electron_charge_e = 1.602176634e-19;  // C
    static constexpr double vacuum_permittivity_eps0 = 8.8541878128e-12;  // F/m
    static constexpr double speed_of_light_c = 299792458.0;       // m/s
};

inline constexpr double kPi = 3.14159265358979323846;

/// k_B T / h in GHz.
double thermal_frequency_ghz(double temperature_k);

/// A tunneling defect, H = ε τ_z + Δ τ_x, with both terms expressed as E/h in GHz.
/// Used for both the resonant TLS and thermal fluctuators.
struct DefectParams {
    double asymmetry_eps = 0.0;    // GHz
    double tunneling_delta = 0.0;  // GHz, >= 0

    void validate() const;
};

struct EnvironmentParams {
    double temperature = 0.015;              // K
    double relative_permittivity_eps_r = 10.0;
    /// Phonon coupling prefactor α. Rates come out in whatever time unit α
    /// carries, per GHz^3 (Δ² E with both in GHz).
    double phonon_alpha = 1.0;

    void validate() const;
};

/// Electric dipole: magnitude in e·Å along a unit orientation vector.
struct DipoleMoment {
    double magnitude = 0.0;
    Eigen::Vector3d orientation = Eigen::Vector3d::UnitZ();

    /// Normalizes `direction`; throws std::invalid_argument for a zero vector.
    static DipoleMoment along(double magnitude_eA, const Eigen::Vector3d& direction);

    Eigen::Vector3d vector() const { return magnitude * orientation; }
};

/// Longitudinal coupling between a TLS and a TF, both as g/h in MHz.
///
/// `g_parallel_over_h` is empty until the ε/E projection is applied, either
/// from known defect parameters or in the slow-fluctuator limit.
struct CouplingResult {
    double g_zz_over_h = 0.0;
    std::optional<double> g_parallel_over_h;

    /// g∥ = g_zz (ε_TLS/E_TLS)(ε_TF/E_TF).
    CouplingResult projected(const DefectParams& tls, const DefectParams& tf) const;

    /// Slow thermal fluctuators have Δ_TF ≈ 0, so ε/E ≈ 1 and g∥ ≈ g_zz.
    CouplingResult slow_fluctuator_limit() const;
};

/// E/h = √(ε² + Δ²) in GHz.
double transition_energy(const DefectParams& defect);

/// exp(−hE/k_B T). Throws std::invalid_argument for T <= 0.
double boltzmann_factor(double energy_ghz, double temperature_k);

struct PhononRates {
    double relax_e_to_g = 0.0;
    double excite_g_to_e = 0.0;
};

/// Γ_e→g = α Δ² E coth(E / 2k_BT), Γ_g→e = exp(−E/k_BT) Γ_e→g.
/// Throws std::domain_error when E_TF = 0 (coth diverges).
PhononRates phonon_rates(const DefectParams& tf, const EnvironmentParams& env);

/// Maximum transverse qubit–defect coupling g = (2ed/x) √(hf / 2C_q), returned as g/h in MHz.
/// The dipole angle relative to the qubit field is dropped.
double qubit_defect_coupling(double dipole_length_angstrom, double field_length_m,
                             double frequency_ghz, double qubit_capacitance_f);

/// Electrical dipole–dipole g_zz between two defects:
///   g_zz/2 = (p1⊥·p2⊥ − 2 p1∥ p2∥) / (4π ε0 εr r³)
/// where ∥/⊥ are taken relative to the separation unit vector. Returned as g_zz/h in MHz;
/// the projection to g∥ is left to the caller.
/// Throws std::domain_error for zero separation.
CouplingResult dipole_dipole_gzz(const DipoleMoment& p1, const DipoleMoment& p2,
                                 const Eigen::Vector3d& separation_nm, double eps_r);

/// g∥ = g_zz (ε_TLS/E_TLS)(ε_TF/E_TF). Throws std::domain_error if either E is zero.
double g_parallel_from_gzz(double g_zz_over_h, const DefectParams& tls, const DefectParams& tf);

/// Converts a coupling expressed as g/h to the numerically larger g/ħ (same MHz label).
inline double to_angular(double coupling_over_h) { return 2.0 * kPi * coupling_over_h; }

}  // namespace tlsdyn::phys
