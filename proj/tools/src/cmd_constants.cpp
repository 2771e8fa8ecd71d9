#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "commands.hpp"
#include "tlsdyn/dataset_io.hpp"
#include "tlsdyn/physmodel.hpp"
#include "tlsdyn/spectra.hpp"

namespace tlsdyn::cli {

namespace {

struct Row {
    std::string quantity;
    double computed;
    double quoted;
    std::string unit;
};

constexpr double kInch = 0.0254;  // m

}  // namespace

int cmd_constants(Context& ctx) {
    ctx.config.reject_unknown_keys();

    const double qubit_f = 5.5;        // GHz
    const double qubit_c = 75e-15;     // F
    const double dipole = 1.0;         // Å

    const phys::DipoleMoment p = phys::DipoleMoment::along(1.0, Eigen::Vector3d::UnitX());
    const double gzz = std::abs(phys::dipole_dipole_gzz(p, p, Eigen::Vector3d(35.0, 0.0, 0.0), 10.0).g_zz_over_h);
    // Mean spacing (V/N)^(1/3) for 5e4 GHz^-1 um^-3 over 1 GHz, in nm.
    const double spacing = std::cbrt(1.0 / 5e4) * 1000.0;

    const std::vector<Row> rows = {
        {"control_line_spacing", spectra::control_line_spacing_ghz(23.0 * kInch, 2.1) * 1000.0, 177.0, "MHz"},
        {"boltzmann_factor_5.5GHz_15mK", phys::boltzmann_factor(qubit_f, 0.015), 1e-8, "1"},
        {"thermal_frequency_15mK", phys::thermal_frequency_ghz(0.015), 0.3126, "GHz"},
        {"coupling_x_20um", phys::qubit_defect_coupling(dipole, 20e-6, qubit_f, qubit_c), 0.010, "MHz"},
        {"coupling_x_1um", phys::qubit_defect_coupling(dipole, 1e-6, qubit_f, qubit_c), 0.250, "MHz"},
        {"coupling_x_2nm", phys::qubit_defect_coupling(dipole, 2e-9, qubit_f, qubit_c), 100.0, "MHz"},
        {"gzz_collinear_1eA_35nm", gzz, 30.0, "MHz"},
        {"tf_spacing_5e4", spacing, 25.0, "nm"},
    };

    auto out = open_output(ctx, "constants.csv");
    out << "quantity,computed,quoted,unit,ratio\n";
    char line[160];
    std::snprintf(line, sizeof line, "%-30s %14s %14s %6s %8s\n", "quantity", "computed", "quoted", "unit", "ratio");
    ctx.log << line;
    for (const auto& r : rows) {
        const double ratio = r.computed / r.quoted;
        out << r.quantity << ',' << io::format_number(r.computed) << ',' << io::format_number(r.quoted) << ','
            << r.unit << ',' << io::format_number(ratio) << '\n';
        std::snprintf(line, sizeof line, "%-30s %14.4g %14.4g %6s %8.3f\n", r.quantity.c_str(), r.computed, r.quoted,
                      r.unit.c_str(), ratio);
        ctx.log << line;
    }
    return kExitOk;
}

}  // namespace tlsdyn::cli
