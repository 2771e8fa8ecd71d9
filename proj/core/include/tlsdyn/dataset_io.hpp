// CSV readers and writers for T1 datasets, trajectories and decay curves
//
// Layouts (one header line each):
//   dataset     time_hr,freq_GHz,t1_us          row-major by time; optional 4th column t1_err_us
//   trajectory  time_hr,delta_E_MHz
//   ensemble    traj_id,time_hr,delta_E_MHz
//   decay       delay_us,p1,shots

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "tlsdyn/spectra.hpp"
#include "tlsdyn/trajectory.hpp"

namespace tlsdyn::io {

/// Malformed input. row and column are 1-based; 0 means "not applicable".
class DataError : public std::runtime_error {
public:
    DataError(const std::string& what, std::size_t row, std::size_t column);
    std::size_t row() const { return row_; }
    std::size_t column() const { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

/// Shortest round-trippable-enough text for a double ("%.9g").
std::string format_number(double v);

void write_dataset_csv(std::ostream& out, const spectra::T1Dataset& dataset);
/// Rows must form a complete time × frequency grid in row-major order.
spectra::T1Dataset read_dataset_csv(std::istream& in);

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);
Trajectory read_trajectory_csv(std::istream& in);

void write_ensemble_csv(std::ostream& out, const std::vector<Trajectory>& trajectories);
/// Trajectories ordered by first appearance of their traj_id.
std::vector<Trajectory> read_ensemble_csv(std::istream& in);

void write_decay_csv(std::ostream& out, const spectra::DecayCurve& curve);
spectra::DecayCurve read_decay_csv(std::istream& in);

/// File variants; DataError for unreadable files as well.
void save(const std::filesystem::path& path, const spectra::T1Dataset& dataset);
spectra::T1Dataset load_dataset(const std::filesystem::path& path);

}  // namespace tlsdyn::io
