#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>

namespace tlsdyn::analysis {

/// One row of the consolidated defect table.
struct DefectReport {
    std::string qubit;
    std::string defect;
    double g_i_mhz = 0.0;
    double g_i_ci = 0.0;
    double gamma_i_mhz = 0.0;
    double gamma_i_ci = 0.0;
    std::optional<double> g_parallel_mhz;   // half the typical jump amplitude
    std::optional<double> jump_rate_per_hr;
    std::optional<double> energy_over_kbt;
};

/// Header `qubit,defect,g_i_MHz,g_i_ci,Gamma_i_MHz,Gamma_i_ci,g_par_MHz,jump_rate_hr,E_TF_over_kBT`.
/// Absent values are written as empty fields.
void write_report_csv(std::ostream& out, std::span<const DefectReport> rows);

}  // namespace tlsdyn::analysis
