#pragma once

#include "resv/readout.hpp"
#include "resv/reservoir.hpp"

#include <nlohmann/json.hpp>

namespace resv {

/// {type, dims: {N, d}, matrices: {name: row-major array}, params: {...}}
/// with type one of "linear", "leaky_esn", "sinusoid".
[[nodiscard]] nlohmann::ordered_json model_to_json(const ReservoirModel& model);

/// Inverse of model_to_json. Throws std::invalid_argument on malformed input.
[[nodiscard]] ReservoirModel model_from_json(const nlohmann::json& j);

/// Linear reservoir plus feature bank (alpha D x N, beta) and readout weights.
[[nodiscard]] nlohmann::ordered_json closed_loop_to_json(const ClosedLoopSystem& sys);
[[nodiscard]] ClosedLoopSystem closed_loop_from_json(const nlohmann::json& j);

[[nodiscard]] std::vector<double> to_row_major(const Mat& m);
[[nodiscard]] Mat from_row_major(const std::vector<double>& v, Eigen::Index rows, Eigen::Index cols);

} // namespace resv
