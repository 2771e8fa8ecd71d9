#pragma once

#include <cstddef>
#include <vector>

namespace tlsdyn {

/// Transition-frequency offsets ΔE(t)/h = E(t)/h − E(0)/h of one defect, in MHz,
/// sampled on a uniform time grid in hours.
struct Trajectory {
    std::vector<double> times_hr;
    std::vector<double> delta_mhz;

    std::size_t size() const { return delta_mhz.size(); }
    bool empty() const { return delta_mhz.empty(); }
    double duration_hr() const { return times_hr.empty() ? 0.0 : times_hr.back() - times_hr.front(); }

    /// Piecewise-constant (sample-and-hold) lookup: the value at the last grid time <= t.
    /// Times before the first sample return the first value.
    double value_at(double t_hr) const;

    /// Throws std::invalid_argument on mismatched lengths or non-increasing times.
    void validate() const;

    /// Uniform grid t_k = k·dt, k = 0..steps, with all offsets zero.
    static Trajectory zeros(std::size_t steps, double dt_hr);
};

}  // namespace tlsdyn
