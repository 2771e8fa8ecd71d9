#include "tlsdyn/report.hpp"

#include <ostream>

#include "tlsdyn/dataset_io.hpp"

namespace tlsdyn::analysis {

namespace {

std::string field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + '"';
}

std::string field(const std::optional<double>& v) {
    return v ? io::format_number(*v) : std::string();
}

}  // namespace

void write_report_csv(std::ostream& out, std::span<const DefectReport> rows) {
    out << "qubit,defect,g_i_MHz,g_i_ci,Gamma_i_MHz,Gamma_i_ci,g_par_MHz,jump_rate_hr,E_TF_over_kBT\n";
    for (const auto& r : rows) {
        out << field(r.qubit) << ',' << field(r.defect) << ',' << io::format_number(r.g_i_mhz) << ','
            << io::format_number(r.g_i_ci) << ',' << io::format_number(r.gamma_i_mhz) << ','
            << io::format_number(r.gamma_i_ci) << ',' << field(r.g_parallel_mhz) << ','
            << field(r.jump_rate_per_hr) << ',' << field(r.energy_over_kbt) << '\n';
    }
}

}  // namespace tlsdyn::analysis
