#include "resv/io.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace resv::io {

std::string format_double(double x) {
    char buf[40];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf, static_cast<std::size_t>(n));
}

void write_csv(std::ostream& out, std::span<const std::string> header,
               const std::vector<std::vector<double>>& rows) {
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size()) throw std::invalid_argument("csv row width mismatch");
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
        out << '\n';
    }
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first < last && *first == ' ') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) throw std::runtime_error("malformed csv number: '" + s + "'");
    return v;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("csv input has no header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    table.header = split(line);
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split(line);
        if (fields.size() != table.header.size()) throw std::runtime_error("ragged csv row");
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) row.push_back(parse_double(f));
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    const int q = traj.dim();
    std::vector<std::string> header{"t"};
    for (int i = 0; i < q; ++i) header.push_back("x" + std::to_string(i));
    std::vector<std::vector<double>> rows;
    rows.reserve(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        std::vector<double> row{traj.times()[k]};
        const Vec& x = traj.states()[k];
        row.insert(row.end(), x.data(), x.data() + x.size());
        rows.push_back(std::move(row));
    }
    write_csv(out, header, rows);
}

Trajectory read_trajectory_csv(std::istream& in) {
    const CsvTable table = read_csv(in);
    if (table.header.empty() || table.header.front() != "t")
        throw std::runtime_error("trajectory csv must start with column 't'");
    if (table.rows.empty()) throw std::runtime_error("trajectory csv has no rows");
    std::vector<double> times;
    std::vector<Vec> states;
    for (const auto& row : table.rows) {
        times.push_back(row.front());
        states.emplace_back(Eigen::Map<const Vec>(row.data() + 1, static_cast<Eigen::Index>(row.size() - 1)));
    }
    return Trajectory(std::move(times), std::move(states));
}

} // namespace resv::io
