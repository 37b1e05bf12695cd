#pragma once

#include "resv/dynamics.hpp"
#include "resv/types.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace resv::io {

/// Shortest-form-independent rendering with 17 significant digits, so every
/// double parses back to the identical value.
[[nodiscard]] std::string format_double(double x);

/// Writes `header` then one comma-separated row per entry of `rows`.
void write_csv(std::ostream& out, std::span<const std::string> header,
               const std::vector<std::vector<double>>& rows);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

/// Numeric CSV with one header line. Throws std::runtime_error on malformed
/// input (ragged rows, non-numeric fields, missing header).
[[nodiscard]] CsvTable read_csv(std::istream& in);

/// Header `t,x0,...,x{q-1}`, one row per stored point.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
[[nodiscard]] Trajectory read_trajectory_csv(std::istream& in);

} // namespace resv::io
