#include "tlsdyn/trajectory.hpp"

#include <algorithm>
#include <stdexcept>

namespace tlsdyn {

double Trajectory::value_at(double t_hr) const {
    if (empty()) throw std::out_of_range("Trajectory::value_at on empty trajectory");
    // Tolerate grid times that were accumulated in floating point.
    constexpr double kSlack = 1e-9;
    auto it = std::upper_bound(times_hr.begin(), times_hr.end(), t_hr + kSlack);
    if (it == times_hr.begin()) return delta_mhz.front();
    return delta_mhz[static_cast<std::size_t>(std::distance(times_hr.begin(), it)) - 1];
}

void Trajectory::validate() const {
    if (times_hr.size() != delta_mhz.size()) {
        throw std::invalid_argument("Trajectory: times and offsets differ in length");
    }
    for (std::size_t i = 1; i < times_hr.size(); ++i) {
        if (!(times_hr[i] > times_hr[i - 1])) {
            throw std::invalid_argument("Trajectory: times must be strictly increasing");
        }
    }
}

Trajectory Trajectory::zeros(std::size_t steps, double dt_hr) {
    Trajectory t;
    t.times_hr.resize(steps + 1);
    t.delta_mhz.assign(steps + 1, 0.0);
    for (std::size_t k = 0; k <= steps; ++k) t.times_hr[k] = static_cast<double>(k) * dt_hr;
    return t;
}

}  // namespace tlsdyn
