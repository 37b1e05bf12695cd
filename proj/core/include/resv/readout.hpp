#pragma once

#include "resv/dynamics.hpp"
#include "resv/random.hpp"
#include "resv/reservoir.hpp"
#include "resv/types.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

namespace resv {

/// Random tanh neurons h_i(x) = tanh(alpha_i . x + beta_i).
struct FeatureBank {
    Mat alpha;  // D x N, one neuron per row
    Vec beta;   // D

    [[nodiscard]] int size() const noexcept { return static_cast<int>(alpha.rows()); }
    [[nodiscard]] int input_dim() const noexcept { return static_cast<int>(alpha.cols()); }
};

/// Entries i.i.d. U[-0.5, 0.5], drawn neuron by neuron (alpha_i then beta_i).
[[nodiscard]] FeatureBank sample_features(int d, int n, Rng& rng);

[[nodiscard]] Vec features_apply(const FeatureBank& bank, const Vec& x);

/// D x N matrix with rows sech^2(alpha_i . x + beta_i) alpha_i^T.
[[nodiscard]] Mat features_grad(const FeatureBank& bank, const Vec& x);

/// Rows are h(x_j)^T for each row x_j of `states`.
[[nodiscard]] Mat feature_matrix(const FeatureBank& bank, const Mat& states);

struct ReadoutWeights {
    Vec w;
    double damp = 0.0;
    double residual = 0.0;  // mean squared training error
};

/// Minimises (1/l) sum_j (y_j - (1/D) sum_i w_i h_i(x_j))^2 + damp^2 |w|^2 / D^2.
/// `states` holds one sample per row. With damp == 0 the minimal-norm
/// minimiser is returned. Throws EmptyDataError when there are no samples.
[[nodiscard]] ReadoutWeights fit_readout(const FeatureBank& bank, const Mat& states,
                                         const Vec& targets, double damp = 0.0);

/// (1/D) sum_i w_i h_i(x).
[[nodiscard]] double readout_predict(const FeatureBank& bank, const ReadoutWeights& weights,
                                     const Vec& x);

/// x' = -A x + C (1/D) sum_i w_i tanh(alpha_i . x + beta_i).
struct ClosedLoopSystem {
    LinearReservoir reservoir;
    FeatureBank bank;
    ReadoutWeights weights;

    [[nodiscard]] Vec rhs(const Vec& x) const;
    [[nodiscard]] VectorField field() const;
};

/// -A + C (1/D) sum_i w_i sech^2(alpha_i . x + beta_i) alpha_i^T.
[[nodiscard]] Mat closed_loop_jacobian(const ClosedLoopSystem& sys, const Vec& x);

[[nodiscard]] Trajectory closed_loop_integrate(const ClosedLoopSystem& sys, const Vec& x0,
                                               double t0, double t1,
                                               const IntegratorConfig& cfg = {});

// ---------------------------------------------------------------------------
// Random-feature central limit experiment

/// Target u(x) = E[w(theta) h(x, theta)] for random parameters theta.
struct CltProblem {
    std::function<double(const Vec& x, const Vec& theta)> h;
    std::function<double(const Vec& theta)> weight;
    std::function<Vec(Rng&)> sample_theta;
};

/// h = tanh(alpha . x + beta), w = 1, theta = (alpha, beta) ~ U[-0.5, 0.5]^{N+1}.
[[nodiscard]] CltProblem tanh_clt_problem(int n);

struct CltOptions {
    Vec x;
    std::vector<int> d_list{10, 30, 100, 300, 1000};
    int trials = 2000;
    std::uint64_t seed = 0;
    std::size_t reference_samples = 1'000'000;
    std::uint64_t reference_seed = 0x0c17'0c17'0c17'0c17ULL;
    unsigned threads = 0;
};

struct CltRow {
    int d = 0;
    int trials = 0;
    double emp_var = 0.0;   // variance over trials of u(x) - estimate
    double emp_mean = 0.0;  // mean over trials of u(x) - estimate
    double ref_var = 0.0;   // sigma^2(x) / D
};

struct CltReport {
    Vec x;
    double u_ref = 0.0;
    double sigma2_ref = 0.0;
    std::vector<CltRow> rows;
    double slope = 0.0;  // of log emp_var against log D; NaN if some variance is 0
};

[[nodiscard]] CltReport clt_experiment(const CltProblem& problem, const CltOptions& opts);

/// Header `D,trials,emp_var,ref_var`.
void write_clt_csv(std::ostream& out, const CltReport& report);

// ---------------------------------------------------------------------------
// Spectrum comparison

struct EigenMatch {
    Complex source;
    Complex matched;
    double distance = 0.0;
};

struct EigenComparison {
    std::vector<EigenMatch> matches;  // ordered by source eigenvalue (real, imag)
    CVec closed_eigenvalues;
    CVec source_eigenvalues;
    double max_distance = 0.0;
};

/// Greedy one-to-one matching: repeatedly pairs the closest unused
/// (source, closed-loop) eigenvalues. Requires closed.rows() >= source.rows().
[[nodiscard]] EigenComparison eig_compare(const Mat& closed, const Mat& source);

/// Header `source_re,source_im,matched_re,matched_im,dist`.
void write_eig_compare_csv(std::ostream& out, const EigenComparison& cmp);

} // namespace resv
