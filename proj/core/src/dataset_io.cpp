#include "tlsdyn/dataset_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace tlsdyn::io {

namespace {

struct Row {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

// Reads the header and the data rows; blank lines and lines starting with '#' are skipped.
std::vector<Row> read_rows(std::istream& in, const std::vector<std::string>& required,
                           std::size_t optional_columns = 0) {
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        auto fields = split(t);
        if (!have_header) {
            if (fields.size() < required.size() || fields.size() > required.size() + optional_columns) {
                throw DataError("unexpected header column count", line_no, 0);
            }
            for (std::size_t c = 0; c < required.size(); ++c) {
                if (fields[c] != required[c]) {
                    throw DataError("expected column '" + required[c] + "', found '" + fields[c] + "'", line_no,
                                    c + 1);
                }
            }
            have_header = true;
            continue;
        }
        rows.push_back({line_no, std::move(fields)});
    }
    if (!have_header) throw DataError("missing header", 0, 0);
    return rows;
}

double parse_number(const Row& row, std::size_t column) {
    if (column >= row.fields.size()) throw DataError("missing field", row.line, column + 1);
    const std::string& s = row.fields[column];
    if (s.empty()) throw DataError("empty field", row.line, column + 1);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
        throw DataError("not a finite number: '" + s + "'", row.line, column + 1);
    }
    return v;
}

void check_width(const Row& row, std::size_t width) {
    if (row.fields.size() != width) {
        throw DataError("expected " + std::to_string(width) + " fields, found " + std::to_string(row.fields.size()),
                        row.line, 0);
    }
}

Trajectory build_trajectory(const std::vector<std::pair<double, double>>& samples, std::size_t first_line) {
    Trajectory t;
    for (const auto& [time, delta] : samples) {
        if (!t.times_hr.empty() && !(time > t.times_hr.back())) {
            throw DataError("times must be strictly increasing", first_line, 0);
        }
        t.times_hr.push_back(time);
        t.delta_mhz.push_back(delta);
    }
    return t;
}

}  // namespace

DataError::DataError(const std::string& what, std::size_t row, std::size_t column)
    : std::runtime_error(row == 0 ? what
                                  : "line " + std::to_string(row) +
                                        (column == 0 ? std::string() : ", column " + std::to_string(column)) +
                                        ": " + what),
      row_(row),
      column_(column) {}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void write_dataset_csv(std::ostream& out, const spectra::T1Dataset& dataset) {
    dataset.validate();
    const bool with_err = dataset.t1_stderr_us.has_value();
    out << "time_hr,freq_GHz,t1_us" << (with_err ? ",t1_err_us" : "") << '\n';
    for (std::size_t ti = 0; ti < dataset.n_times(); ++ti) {
        for (std::size_t fi = 0; fi < dataset.n_freqs(); ++fi) {
            out << format_number(dataset.time_hr[ti]) << ',' << format_number(dataset.freq_ghz[fi]) << ','
                << format_number(dataset.at(ti, fi));
            if (with_err) out << ',' << format_number((*dataset.t1_stderr_us)[ti * dataset.n_freqs() + fi]);
            out << '\n';
        }
    }
}

spectra::T1Dataset read_dataset_csv(std::istream& in) {
    const auto rows = read_rows(in, {"time_hr", "freq_GHz", "t1_us"}, 1);
    if (rows.empty()) throw DataError("dataset has no rows", 0, 0);
    const std::size_t width = rows.front().fields.size();
    const bool with_err = width == 4;

    spectra::T1Dataset ds;
    std::vector<double> errs;
    std::size_t fi = 0;
    for (const Row& row : rows) {
        check_width(row, width);
        const double t = parse_number(row, 0);
        const double f = parse_number(row, 1);
        const double t1 = parse_number(row, 2);
        if (!(t1 > 0.0)) throw DataError("T1 must be positive", row.line, 3);

        if (ds.time_hr.empty() || t != ds.time_hr.back()) {
            if (!ds.time_hr.empty()) {
                if (fi != ds.freq_ghz.size()) throw DataError("incomplete frequency sweep", row.line, 0);
                if (!(t > ds.time_hr.back())) throw DataError("times must be increasing", row.line, 1);
            }
            ds.time_hr.push_back(t);
            fi = 0;
        }
        if (ds.time_hr.size() == 1) {
            if (!ds.freq_ghz.empty() && !(f > ds.freq_ghz.back())) {
                throw DataError("frequencies must be strictly increasing", row.line, 2);
            }
            ds.freq_ghz.push_back(f);
        } else if (fi >= ds.freq_ghz.size() || f != ds.freq_ghz[fi]) {
            throw DataError("frequency grid differs from the first sweep", row.line, 2);
        }
        ++fi;
        ds.t1_us.push_back(t1);
        if (with_err) errs.push_back(parse_number(row, 3));
    }
    if (fi != ds.freq_ghz.size()) throw DataError("incomplete frequency sweep", rows.back().line, 0);
    if (with_err) ds.t1_stderr_us = std::move(errs);
    return ds;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
    trajectory.validate();
    out << "time_hr,delta_E_MHz\n";
    for (std::size_t k = 0; k < trajectory.size(); ++k) {
        out << format_number(trajectory.times_hr[k]) << ',' << format_number(trajectory.delta_mhz[k]) << '\n';
    }
}

Trajectory read_trajectory_csv(std::istream& in) {
    const auto rows = read_rows(in, {"time_hr", "delta_E_MHz"});
    std::vector<std::pair<double, double>> samples;
    for (const Row& row : rows) {
        check_width(row, 2);
        const double t = parse_number(row, 0);
        if (!samples.empty() && !(t > samples.back().first)) {
            throw DataError("times must be strictly increasing", row.line, 1);
        }
        samples.emplace_back(t, parse_number(row, 1));
    }
    return build_trajectory(samples, rows.empty() ? 0 : rows.front().line);
}

void write_ensemble_csv(std::ostream& out, const std::vector<Trajectory>& trajectories) {
    out << "traj_id,time_hr,delta_E_MHz\n";
    for (std::size_t id = 0; id < trajectories.size(); ++id) {
        const Trajectory& t = trajectories[id];
        t.validate();
        for (std::size_t k = 0; k < t.size(); ++k) {
            out << id << ',' << format_number(t.times_hr[k]) << ',' << format_number(t.delta_mhz[k]) << '\n';
        }
    }
}

std::vector<Trajectory> read_ensemble_csv(std::istream& in) {
    const auto rows = read_rows(in, {"traj_id", "time_hr", "delta_E_MHz"});
    std::map<std::string, std::size_t> index;
    std::vector<std::vector<std::pair<double, double>>> samples;
    for (const Row& row : rows) {
        check_width(row, 3);
        const std::string& id = row.fields[0];
        if (id.empty()) throw DataError("empty traj_id", row.line, 1);
        auto [it, inserted] = index.emplace(id, samples.size());
        if (inserted) samples.emplace_back();
        auto& s = samples[it->second];
        const double t = parse_number(row, 1);
        if (!s.empty() && !(t > s.back().first)) throw DataError("times must be strictly increasing", row.line, 2);
        s.emplace_back(t, parse_number(row, 2));
    }
    std::vector<Trajectory> out;
    for (const auto& s : samples) out.push_back(build_trajectory(s, 0));
    return out;
}

void write_decay_csv(std::ostream& out, const spectra::DecayCurve& curve) {
    curve.validate();
    out << "delay_us,p1,shots\n";
    for (std::size_t i = 0; i < curve.size(); ++i) {
        out << format_number(curve.delays_us[i]) << ',' << format_number(curve.excited_population[i]) << ','
            << curve.shots_per_delay << '\n';
    }
}

spectra::DecayCurve read_decay_csv(std::istream& in) {
    const auto rows = read_rows(in, {"delay_us", "p1", "shots"});
    spectra::DecayCurve curve;
    for (const Row& row : rows) {
        check_width(row, 3);
        const double delay = parse_number(row, 0);
        const double p = parse_number(row, 1);
        const double shots = parse_number(row, 2);
        if (!(p >= 0.0 && p <= 1.0)) throw DataError("p1 must lie in [0, 1]", row.line, 2);
        if (shots < 0 || shots != std::floor(shots)) throw DataError("shots must be a nonnegative integer", row.line, 3);
        if (!curve.delays_us.empty()) {
            if (!(delay > curve.delays_us.back())) throw DataError("delays must be strictly increasing", row.line, 1);
            if (static_cast<int>(shots) != curve.shots_per_delay) {
                throw DataError("shots must be the same for every delay", row.line, 3);
            }
        }
        curve.delays_us.push_back(delay);
        curve.excited_population.push_back(p);
        curve.shots_per_delay = static_cast<int>(shots);
    }
    return curve;
}

void save(const std::filesystem::path& path, const spectra::T1Dataset& dataset) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing", 0, 0);
    write_dataset_csv(out, dataset);
    if (!out) throw DataError("write failed: " + path.string(), 0, 0);
}

spectra::T1Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string(), 0, 0);
    return read_dataset_csv(in);
}

}  // namespace tlsdyn::io
