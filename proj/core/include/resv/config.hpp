#pragma once

#include "resv/dynamics.hpp"
#include "resv/types.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace resv::experiments {

struct MultiGsParams {
    double lambda = 1.0;
    double t_end = 100.0;
    double washout = 35.0;
    double output_dt = 0.01;
    int field_grid = 21;        // points per axis of the background field
    double field_extent = 1.0;  // field drawn on [-extent, extent]^2
    double pair_offset = 0.05;  // half-separation of the within-region pairs
};

struct GsCheckParams {
    double a = 1.0;
    Vec anchor = (Vec(2) << 0.0, 1.0).finished();
    double horizon = 20.0;
    double step = 0.01;
    int points = 20;
    double point_spacing = 0.5;
    double washout = 35.0;
    std::vector<double> deltas{1e-2, 1e-3, 1e-4};
    double pde_rtol = 1e-13;
    double pde_atol = 1e-15;
};

struct EmbedCheckParams {
    int n = 7;
    double scale = 30.0;
    int trials = 1000;
    Mat jacobian;  // defaults to the Lorenz-63 Jacobian at m*
    double rank_tol = 1e-8;
};

struct LorenzParams {
    int n = 7;
    int d = 300;
    double scale = 30.0;
    double t_end = 200.0;
    double sample_dt = 0.02;
    double train_start = 0.0;
    double damp = 0.0;
    double perturbation = 0.0;  // added to the first source coordinate
    double closed_loop_horizon = 50.0;
};

struct CltParams {
    Vec x = Vec::Constant(1, 1.5);
    std::vector<int> d_list{10, 30, 100, 300, 1000};
    int trials = 2000;
    std::size_t reference_samples = 1'000'000;
    std::string weight = "one";  // "one" or "zero"
};

struct NoiseParams {
    std::string model = "scalar";  // "scalar" (A = a, C = 1) or "random"
    double a = 1.0;
    int n = 7;
    double scale = 30.0;
    double sigma0 = 0.5;
    std::string scheme = "exact";  // "exact" or "euler_maruyama"
    double dt_scale = 0.1;  // exact: dt = dt_scale / sigma_min(A); euler_maruyama: dt_scale / sigma_max(A)
    double effective_samples = 1e6;
    int chains = 4;
    double burn_in = 0.0;  // 0: 10 / sigma_min(A)
};

using ExperimentParams =
    std::variant<MultiGsParams, GsCheckParams, EmbedCheckParams, LorenzParams, CltParams, NoiseParams>;

inline constexpr std::array<std::string_view, 6> kCommands{
    "multi-gs", "gs-check", "embed-check", "lorenz-reconstruct", "clt", "noise"};

struct ExperimentConfig {
    std::string experiment;
    std::uint64_t seed = 0;
    IntegratorConfig integrator;
    std::string output_dir = "out";
    ExperimentParams params;
};

/// Integrator defaults used when a config omits "integrator" entries.
[[nodiscard]] IntegratorConfig default_integrator(std::string_view command);

/// Validates a config document for `command`:
///   {"experiment": <command>, "seed": u64, "output_dir": str,
///    "integrator": {"rtol", "atol", "max_step", "divergence_norm"}, "params": {...}}
/// Every key is optional except that "experiment", when present, must match
/// the command. Unknown keys, wrong types and out-of-range values raise
/// ConfigError. Overrides replace the document's output_dir and seed.
[[nodiscard]] ExperimentConfig parse_config(std::string_view command, const nlohmann::json& doc,
                                            const std::optional<std::string>& out_override = {},
                                            const std::optional<std::uint64_t>& seed_override = {});

/// Reads and parses a JSON file; I/O and syntax errors raise ConfigError.
[[nodiscard]] ExperimentConfig load_config(std::string_view command, const std::filesystem::path& path,
                                           const std::optional<std::string>& out_override = {},
                                           const std::optional<std::uint64_t>& seed_override = {});

/// Fully expanded config (defaults filled in), as echoed into manifests.
[[nodiscard]] nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);

} // namespace resv::experiments
