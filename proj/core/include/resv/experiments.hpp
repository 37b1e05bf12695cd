#pragma once

#include "resv/config.hpp"
#include "resv/embedding.hpp"
#include "resv/gs.hpp"
#include "resv/readout.hpp"
#include "resv/stochastic.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace resv::experiments {

// --- multi-gs ---------------------------------------------------------------

struct MultiGsResult {
    std::vector<double> observation_times;  // (0, t_end) on the output grid
    std::vector<double> observations;
    std::vector<double> grid;                       // [washout, t_end]
    std::array<Vec, 4> seeds;                       // (+-1/2, +-1/2)
    std::array<std::vector<Vec>, 4> trajectories;   // on `grid`
    Mat pairwise_min;                               // 4 x 4 minimum distances over `grid`
    double min_pairwise_distance = 0.0;
    std::array<double, 4> within_region_distance{};  // perturbed pair distance at washout
    std::vector<std::array<double, 4>> field;        // (x, y, fx, fy) with lambda = 0
};

[[nodiscard]] MultiGsResult compute_multi_gs(const MultiGsParams& p, const IntegratorConfig& cfg);

// --- gs-check -----------------------------------------------------------------

/// Closed-form GS of the scalar reservoir x' = -a x + u driven by the
/// circle observation u: f(u, v) = (a u + v) / (a^2 + 1).
[[nodiscard]] double circle_gs_closed_form(double a, const Vec& m);

struct GsCheckRow {
    GSSample integral;
    GSSample washout;
    double analytic = 0.0;
};

struct PdeRow {
    double delta = 0.0;
    double residual = 0.0;
    double perturbed_residual = 0.0;  // negative control: f + 0.1
};

struct GsCheckResult {
    std::vector<GsCheckRow> rows;
    std::vector<PdeRow> pde;
    double max_integral_error = 0.0;  // |integral - analytic|
    double max_cross_excess = 0.0;    // max(|integral - washout| - bounds); <= 0 means agreement
    double pde_slope = 0.0;
    double integral_seconds = 0.0;
};

[[nodiscard]] GsCheckResult compute_gs_check(const GsCheckParams& p, const IntegratorConfig& cfg);

// --- embed-check --------------------------------------------------------------

[[nodiscard]] EmbeddingSweep compute_embed_check(const EmbedCheckParams& p, std::uint64_t seed);

// --- lorenz-reconstruct ---------------------------------------------------------

struct LorenzResult {
    ClosedLoopSystem closed_loop;
    Trajectory source;                // accepted steps
    std::vector<double> sample_times;  // uniform, spacing sample_dt
    Mat sampled_source;                // rows: samples
    Mat sampled_reservoir;             // rows: samples
    Mat pca;                           // rows: samples, top-3 principal components
    Vec x_star;
    Mat closed_jacobian;
    EigenComparison comparison;
    std::size_t training_samples = 0;
    double closed_loop_max_norm = 0.0;
    double training_max_norm = 0.0;
    bool closed_loop_bounded = false;  // |x| <= 10 x max training |x| over the horizon
    bool closed_loop_diverged = false;
};

[[nodiscard]] LorenzResult compute_lorenz(const LorenzParams& p, std::uint64_t seed,
                                          const IntegratorConfig& cfg);

/// Eigenvalue matching of the untrained closed loop (w = 0, Jacobian -A)
/// against the Lorenz Jacobian at m*.
[[nodiscard]] EigenComparison untrained_comparison(const LinearReservoir& res);

/// Principal components of the mean-centred rows, each component's sign fixed
/// so that its largest-magnitude loading is positive.
[[nodiscard]] Mat principal_components(const Mat& rows, int count);

// --- clt / noise -----------------------------------------------------------------

[[nodiscard]] CltReport compute_clt(const CltParams& p, std::uint64_t seed);

struct NoiseResult {
    Mat a;
    Mat c;
    double dt = 0.0;
    double duration_per_chain = 0.0;
    CovarianceReport report;
};

[[nodiscard]] NoiseResult compute_noise(const NoiseParams& p, std::uint64_t seed);

// --- orchestration ------------------------------------------------------------------

struct EmittedFile {
    std::string name;
    std::string sha256;
    std::size_t bytes = 0;
};

struct RunSummary {
    std::vector<EmittedFile> files;  // data files; manifest.json is written last
    nlohmann::ordered_json summary;
};

[[nodiscard]] std::string sha256_hex(std::string_view data);

/// Runs the configured experiment and writes its data files, summary.json and
/// manifest.json (config echo, version, wall clock, file hashes) into
/// cfg.output_dir.
RunSummary run_experiment(const ExperimentConfig& cfg);

} // namespace resv::experiments
