#include "tlsdyn/physmodel.hpp"

#include <cmath>
#include <stdexcept>

namespace tlsdyn::phys {

namespace {

using C = PhysicalConstants;

constexpr double kGHz = 1e9;
constexpr double kMHz = 1e6;
constexpr double kAngstrom = 1e-10;
constexpr double kNanometer = 1e-9;

}  // namespace

double thermal_frequency_ghz(double temperature_k) {
    return C::boltzmann_kB * temperature_k / C::planck_h / kGHz;
}

void DefectParams::validate() const {
    if (!(tunneling_delta >= 0.0) || !std::isfinite(asymmetry_eps)) {
        throw std::invalid_argument("DefectParams: tunneling_delta must be >= 0 and asymmetry finite");
    }
}

void EnvironmentParams::validate() const {
    if (!(temperature > 0.0)) {
        throw std::invalid_argument("EnvironmentParams: temperature must be positive");
    }
    if (!(relative_permittivity_eps_r >= 1.0)) {
        throw std::invalid_argument("EnvironmentParams: relative permittivity must be >= 1");
    }
    if (!(phonon_alpha > 0.0)) {
        throw std::invalid_argument("EnvironmentParams: phonon_alpha must be positive");
    }
}

DipoleMoment DipoleMoment::along(double magnitude_eA, const Eigen::Vector3d& direction) {
    const double n = direction.norm();
    if (!(n > 0.0)) {
        throw std::invalid_argument("DipoleMoment: orientation must be a nonzero vector");
    }
    if (magnitude_eA < 0.0) {
        throw std::invalid_argument("DipoleMoment: magnitude must be >= 0");
    }
    return DipoleMoment{magnitude_eA, direction / n};
}

CouplingResult CouplingResult::projected(const DefectParams& tls, const DefectParams& tf) const {
    CouplingResult out = *this;
    out.g_parallel_over_h = g_parallel_from_gzz(g_zz_over_h, tls, tf);
    return out;
}

CouplingResult CouplingResult::slow_fluctuator_limit() const {
    CouplingResult out = *this;
    out.g_parallel_over_h = g_zz_over_h;
    return out;
}

double transition_energy(const DefectParams& defect) {
    return std::hypot(defect.asymmetry_eps, defect.tunneling_delta);
}

double boltzmann_factor(double energy_ghz, double temperature_k) {
    if (!(temperature_k > 0.0)) {
        throw std::invalid_argument("boltzmann_factor: temperature must be positive");
    }
    return std::exp(-energy_ghz / thermal_frequency_ghz(temperature_k));
}

PhononRates phonon_rates(const DefectParams& tf, const EnvironmentParams& env) {
    tf.validate();
    env.validate();
    const double e = transition_energy(tf);
    if (!(e > 0.0)) {
        throw std::domain_error("phonon_rates: zero transition energy (coth diverges)");
    }
    const double x = e / thermal_frequency_ghz(env.temperature);
    // coth(x/2) = 1 / tanh(x/2); tanh saturates to 1 cleanly for large x.
    const double coth_half = 1.0 / std::tanh(0.5 * x);
    PhononRates rates;
    rates.relax_e_to_g = env.phonon_alpha * tf.tunneling_delta * tf.tunneling_delta * e * coth_half;
    rates.excite_g_to_e = std::exp(-x) * rates.relax_e_to_g;
    return rates;
}

double qubit_defect_coupling(double dipole_length_angstrom, double field_length_m,
                             double frequency_ghz, double qubit_capacitance_f) {
    if (!(field_length_m > 0.0)) {
        throw std::invalid_argument("qubit_defect_coupling: field length must be positive");
    }
    if (!(dipole_length_angstrom > 0.0) || !(frequency_ghz > 0.0) || !(qubit_capacitance_f > 0.0)) {
        throw std::invalid_argument("qubit_defect_coupling: arguments must be positive");
    }
    const double d = dipole_length_angstrom * kAngstrom;
    const double voltage = std::sqrt(C::planck_h * frequency_ghz * kGHz / (2.0 * qubit_capacitance_f));
    const double g_joule = 2.0 * C::electron_charge_e * d / field_length_m * voltage;
    return g_joule / C::planck_h / kMHz;
}

CouplingResult dipole_dipole_gzz(const DipoleMoment& p1, const DipoleMoment& p2,
                                 const Eigen::Vector3d& separation_nm, double eps_r) {
    const double r = separation_nm.norm();
    if (!(r > 0.0)) {
        throw std::domain_error("dipole_dipole_gzz: zero separation");
    }
    if (!(eps_r >= 1.0)) {
        throw std::invalid_argument("dipole_dipole_gzz: eps_r must be >= 1");
    }
    const Eigen::Vector3d u = separation_nm / r;
    const Eigen::Vector3d v1 = p1.vector();
    const Eigen::Vector3d v2 = p2.vector();
    const double par1 = v1.dot(u);
    const double par2 = v2.dot(u);
    const Eigen::Vector3d perp1 = v1 - par1 * u;
    const Eigen::Vector3d perp2 = v2 - par2 * u;
    const double angular = perp1.dot(perp2) - 2.0 * par1 * par2;  // (e Å)^2

    const double dipole_unit = C::electron_charge_e * kAngstrom;  // C m per e Å
    const double r_m = r * kNanometer;
    const double half_gzz = angular * dipole_unit * dipole_unit /
                            (4.0 * kPi * C::vacuum_permittivity_eps0 * eps_r * r_m * r_m * r_m);
    return CouplingResult{2.0 * half_gzz / C::planck_h / kMHz, std::nullopt};
}

double g_parallel_from_gzz(double g_zz_over_h, const DefectParams& tls, const DefectParams& tf) {
    const double e_tls = transition_energy(tls);
    const double e_tf = transition_energy(tf);
    if (!(e_tls > 0.0) || !(e_tf > 0.0)) {
        throw std::domain_error("g_parallel_from_gzz: zero transition energy");
    }
    return g_zz_over_h * (tls.asymmetry_eps / e_tls) * (tf.asymmetry_eps / e_tf);
}

}  // namespace tlsdyn::phys
