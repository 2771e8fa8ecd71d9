#include "tlsdyn/spectra.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "tlsdyn/fitting.hpp"
#include "tlsdyn/parallel.hpp"
#include "tlsdyn/physmodel.hpp"
#include "tlsdyn/rng.hpp"
#include "tlsdyn/version.hpp"

namespace tlsdyn::spectra {

namespace {

constexpr double kMHzPerGHz = 1000.0;
constexpr double kTwoPi = 2.0 * phys::kPi;

bool strictly_increasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(v[i] > v[i - 1])) return false;
    }
    return true;
}

}  // namespace

double LorentzianPeak::excess_rate(double f_ghz) const {
    const double detuning = (center_ghz - f_ghz) * kMHzPerGHz;
    const double half_width = decoherence_mhz / kTwoPi;
    return 2.0 * coupling_mhz * coupling_mhz * decoherence_mhz /
           (half_width * half_width + detuning * detuning);
}

double LorentzianPeak::peak_excess_rate() const {
    return 2.0 * kTwoPi * kTwoPi * coupling_mhz * coupling_mhz / decoherence_mhz;
}

double LorentzianPeak::fwhm_mhz() const { return decoherence_mhz / phys::kPi; }

void LorentzianPeak::validate() const {
    if (!(coupling_mhz > 0.0) || !(decoherence_mhz > 0.0) || !std::isfinite(center_ghz)) {
        throw std::invalid_argument("LorentzianPeak: coupling and decoherence must be positive");
    }
}

std::optional<bool> regime_valid(const LorentzianPeak& peak, double background_rate_per_us) {
    if (!peak.energy_relaxation_mhz) return std::nullopt;
    const double coupling_rate = kTwoPi * peak.coupling_mhz;
    return *peak.energy_relaxation_mhz > coupling_rate && coupling_rate > background_rate_per_us;
}

double SpectrumModel::rate(double f_ghz) const {
    double r = background_rate_per_us;
    for (const auto& p : peaks) r += p.excess_rate(f_ghz);
    return r;
}

std::size_t SpectrumModel::mobile_count() const {
    std::size_t n = 0;
    for (const auto& p : peaks) n += p.mobile ? 1 : 0;
    return n;
}

void SpectrumModel::validate() const {
    if (!(background_rate_per_us >= 0.0)) {
        throw std::invalid_argument("SpectrumModel: background rate must be >= 0");
    }
    if (!(qubit_dephasing_mhz >= 0.0)) {
        throw std::invalid_argument("SpectrumModel: qubit dephasing must be >= 0");
    }
    for (const auto& p : peaks) p.validate();
}

std::optional<std::vector<double>> RelaxationSpectrum::rate_stderr() const {
    if (!t1_stderr_us) return std::nullopt;
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) {
        const double t1 = 1.0 / rates_per_us[i];
        out[i] = (*t1_stderr_us)[i] / (t1 * t1);
    }
    return out;
}

void RelaxationSpectrum::validate() const {
    if (freqs_ghz.size() != rates_per_us.size()) {
        throw std::invalid_argument("RelaxationSpectrum: frequency and rate lengths differ");
    }
    if (t1_stderr_us && t1_stderr_us->size() != size()) {
        throw std::invalid_argument("RelaxationSpectrum: stderr length differs");
    }
    if (!strictly_increasing(freqs_ghz)) {
        throw std::invalid_argument("RelaxationSpectrum: frequencies must be strictly increasing");
    }
    for (double r : rates_per_us) {
        if (!(r > 0.0) || !std::isfinite(r)) {
            throw std::invalid_argument("RelaxationSpectrum: rates must be positive and finite");
        }
    }
}

RelaxationSpectrum synth_spectrum(const SpectrumModel& model, std::span<const double> grid_ghz) {
    model.validate();
    RelaxationSpectrum out;
    out.freqs_ghz.assign(grid_ghz.begin(), grid_ghz.end());
    out.rates_per_us.reserve(grid_ghz.size());
    for (double f : grid_ghz) out.rates_per_us.push_back(model.rate(f));
    return out;
}

double control_line_spacing_ghz(double cable_length_m, double eps_r) {
    if (!(cable_length_m > 0.0)) throw std::invalid_argument("control line length must be positive");
    if (!(eps_r >= 1.0)) throw std::invalid_argument("control line eps_r must be >= 1");
    return phys::PhysicalConstants::speed_of_light_c / (2.0 * cable_length_m * std::sqrt(eps_r)) / 1e9;
}

std::vector<double> spurious_resonances(double cable_length_m, double eps_r,
                                        double band_lo_ghz, double band_hi_ghz) {
    const double spacing = control_line_spacing_ghz(cable_length_m, eps_r);
    std::vector<double> modes;
    if (!(band_hi_ghz >= band_lo_ghz)) return modes;
    const auto first = static_cast<long long>(std::ceil(band_lo_ghz / spacing));
    for (long long n = std::max(1LL, first);; ++n) {
        const double f = static_cast<double>(n) * spacing;
        if (f > band_hi_ghz) break;
        modes.push_back(f);
    }
    return modes;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2) {
        throw std::invalid_argument("log_spaced: need 0 < lo < hi and n >= 2");
    }
    std::vector<double> out(n);
    const double ratio = std::log(hi / lo);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = lo * std::exp(ratio * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    out.back() = hi;
    return out;
}

std::vector<double> linear_grid(double start, double stop, double step) {
    if (!(step > 0.0) || !(stop >= start)) {
        throw std::invalid_argument("linear_grid: need step > 0 and stop >= start");
    }
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = start + static_cast<double>(i) * step;
    return out;
}

void DecayProtocol::validate() const {
    if (delays_us.size() < 2 || !strictly_increasing(delays_us) || delays_us.front() < 0.0) {
        throw std::invalid_argument("DecayProtocol: delays must be nonnegative and strictly increasing");
    }
    if (shots < 1) throw std::invalid_argument("DecayProtocol: shots must be >= 1");
    auto fid_ok = [](double f) { return f > 0.5 && f <= 1.0; };
    if (!fid_ok(init_fidelity) || !fid_ok(readout_fidelity)) {
        throw std::invalid_argument("DecayProtocol: fidelities must lie in (0.5, 1]");
    }
}

void DecayCurve::validate() const {
    if (delays_us.size() != excited_population.size()) {
        throw std::invalid_argument("DecayCurve: delay and population lengths differ");
    }
    if (!strictly_increasing(delays_us)) {
        throw std::invalid_argument("DecayCurve: delays must be strictly increasing");
    }
    for (double p : excited_population) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("DecayCurve: populations must lie in [0, 1]");
    }
}

double measured_population(double delay_us, double t1_us, const DecayProtocol& protocol) {
    const double p = protocol.init_fidelity * std::exp(-delay_us / t1_us);
    const double f = protocol.readout_fidelity;
    return f * p + (1.0 - f) * (1.0 - p);
}

DecayCurve synth_decay(double t1_us, const DecayProtocol& protocol, std::uint64_t seed) {
    if (!(t1_us > 0.0)) throw std::invalid_argument("synth_decay: T1 must be positive");
    protocol.validate();
    Engine rng = make_engine(seed);
    DecayCurve curve;
    curve.delays_us = protocol.delays_us;
    curve.shots_per_delay = protocol.shots;
    curve.excited_population.reserve(protocol.delays_us.size());
    for (double t : protocol.delays_us) {
        std::binomial_distribution<int> readout(protocol.shots, measured_population(t, t1_us, protocol));
        curve.excited_population.push_back(static_cast<double>(readout(rng)) / protocol.shots);
    }
    return curve;
}

RelaxationSpectrum T1Dataset::slice(std::size_t ti) const {
    if (ti >= n_times()) throw std::out_of_range("T1Dataset::slice: time index out of range");
    RelaxationSpectrum s;
    s.freqs_ghz = freq_ghz;
    s.rates_per_us.resize(n_freqs());
    for (std::size_t fi = 0; fi < n_freqs(); ++fi) s.rates_per_us[fi] = 1.0 / at(ti, fi);
    if (t1_stderr_us) {
        const auto first = t1_stderr_us->begin() + static_cast<std::ptrdiff_t>(ti * n_freqs());
        s.t1_stderr_us = std::vector<double>(first, first + static_cast<std::ptrdiff_t>(n_freqs()));
    }
    return s;
}

void T1Dataset::validate() const {
    if (t1_us.size() != n_times() * n_freqs()) {
        throw std::invalid_argument("T1Dataset: grid size does not match axis lengths");
    }
    if (t1_stderr_us && t1_stderr_us->size() != t1_us.size()) {
        throw std::invalid_argument("T1Dataset: stderr grid size mismatch");
    }
    if (!strictly_increasing(time_hr) || !strictly_increasing(freq_ghz)) {
        throw std::invalid_argument("T1Dataset: axes must be strictly increasing");
    }
    for (double t1 : t1_us) {
        if (!(t1 > 0.0) || !std::isfinite(t1)) throw std::invalid_argument("T1Dataset: T1 values must be positive");
    }
}

T1Dataset synth_dataset(const SpectrumModel& base_model, std::span<const Trajectory> trajectories,
                        std::span<const double> grid_ghz, std::span<const double> time_stamps_hr,
                        const DatasetNoise& noise, std::uint64_t seed, unsigned threads) {
    base_model.validate();
    if (trajectories.size() != base_model.mobile_count()) {
        throw std::invalid_argument("synth_dataset: " + std::to_string(trajectories.size()) +
                                    " trajectories for " + std::to_string(base_model.mobile_count()) +
                                    " mobile peaks");
    }
    for (const auto& traj : trajectories) {
        traj.validate();
        if (traj.empty()) throw std::invalid_argument("synth_dataset: empty trajectory");
        if (!time_stamps_hr.empty() && traj.times_hr.back() + 1e-9 < time_stamps_hr.back()) {
            throw std::invalid_argument("synth_dataset: trajectory does not cover the time stamps");
        }
    }
    if (noise.shot_level) noise.protocol.validate();

    T1Dataset ds;
    ds.time_hr.assign(time_stamps_hr.begin(), time_stamps_hr.end());
    ds.freq_ghz.assign(grid_ghz.begin(), grid_ghz.end());
    ds.t1_us.assign(ds.n_times() * ds.n_freqs(), 0.0);
    if (noise.shot_level) ds.t1_stderr_us = std::vector<double>(ds.t1_us.size(), 0.0);

    parallel_for(ds.n_times(), threads, [&](std::size_t ti) {
        const double t = ds.time_hr[ti];
        SpectrumModel model = base_model;
        std::size_t k = 0;
        for (auto& p : model.peaks) {
            if (p.mobile) p.center_ghz += trajectories[k++].value_at(t) / kMHzPerGHz;
        }
        Engine rng = make_engine(derive_seed(seed, ti));
        double jitter_ghz = 0.0;
        if (noise.freq_jitter_mhz > 0.0) {
            jitter_ghz = (2.0 * uniform01(rng) - 1.0) * noise.freq_jitter_mhz / kMHzPerGHz;
        }
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (std::size_t fi = 0; fi < ds.n_freqs(); ++fi) {
            const double rate = model.rate(ds.freq_ghz[fi] + jitter_ghz);
            double t1 = 1.0 / rate;
            if (noise.shot_level) {
                const auto curve = synth_decay(t1, noise.protocol, derive_seed(seed, ti, fi + 1));
                const auto fit = analysis::fit_decay(curve);
                if (fit.ok) {
                    t1 = fit.t1_us;
                    (*ds.t1_stderr_us)[ti * ds.n_freqs() + fi] = fit.t1_ci_us;
                } else {
                    // Unfittable decay: keep the model value with a 100% error bar.
                    (*ds.t1_stderr_us)[ti * ds.n_freqs() + fi] = t1;
                }
            }
            if (noise.t1_lognormal_sigma > 0.0) t1 *= std::exp(noise.t1_lognormal_sigma * gauss(rng));
            ds.at(ti, fi) = t1;
        }
    });

    ds.provenance = {
        {"software", "tlsdyn"},
        {"version", kVersion},
        {"seed", seed},
        {"model", to_json(base_model)},
        {"noise",
         {{"t1_lognormal_sigma", noise.t1_lognormal_sigma},
          {"freq_jitter_mhz", noise.freq_jitter_mhz},
          {"shot_level", noise.shot_level},
          {"shots", noise.protocol.shots},
          {"init_fidelity", noise.protocol.init_fidelity},
          {"readout_fidelity", noise.protocol.readout_fidelity},
          {"n_delays", noise.protocol.delays_us.size()}}},
        {"n_trajectories", trajectories.size()},
    };
    return ds;
}

nlohmann::json to_json(const LorentzianPeak& peak) {
    nlohmann::json j = {{"center_ghz", peak.center_ghz},
                        {"coupling_mhz", peak.coupling_mhz},
                        {"decoherence_mhz", peak.decoherence_mhz},
                        {"mobile", peak.mobile}};
    if (peak.energy_relaxation_mhz) j["energy_relaxation_mhz"] = *peak.energy_relaxation_mhz;
    return j;
}

nlohmann::json to_json(const SpectrumModel& model) {
    nlohmann::json peaks = nlohmann::json::array();
    for (const auto& p : model.peaks) peaks.push_back(to_json(p));
    return {{"background_rate_per_us", model.background_rate_per_us},
            {"qubit_dephasing_mhz", model.qubit_dephasing_mhz},
            {"peaks", peaks}};
}

}  // namespace tlsdyn::spectra
