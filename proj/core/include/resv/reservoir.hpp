#pragma once

#include "resv/dynamics.hpp"
#include "resv/linalg.hpp"
#include "resv/types.hpp"

#include <functional>
#include <span>
#include <variant>
#include <vector>

namespace resv {

/// x' = -A x + C z with A symmetric positive definite.
class LinearReservoir {
public:
    /// Throws std::invalid_argument when A is not SPD or C has the wrong
    /// number of rows.
    LinearReservoir(Mat a, Mat c);

    [[nodiscard]] const Mat& A() const noexcept { return a_; }
    [[nodiscard]] const Mat& C() const noexcept { return c_; }
    [[nodiscard]] const SpectralDecomposition& spectral() const noexcept { return spectral_; }
    [[nodiscard]] int state_dim() const noexcept { return static_cast<int>(a_.rows()); }
    [[nodiscard]] int input_dim() const noexcept { return static_cast<int>(c_.cols()); }

private:
    Mat a_;
    Mat c_;
    SpectralDecomposition spectral_;
};

/// Leaky-integrator echo state network x' = -alpha x + tanh(A x + C z + b).
struct LeakyESN {
    double alpha = 1.0;
    Mat A;
    Mat C;
    Vec b;

    /// Throws std::invalid_argument on non-positive leak or shape mismatch.
    void validate() const;
};

/// Two-dimensional reservoir
///   x' = sin(2 pi x) + lambda sin z,  y' = sin(2 pi y) + lambda cos z.
struct SinusoidReservoir {
    double lambda = 1.0;
};

using ReservoirModel = std::variant<LinearReservoir, LeakyESN, SinusoidReservoir>;

[[nodiscard]] int state_dim(const ReservoirModel& model);
[[nodiscard]] int input_dim(const ReservoirModel& model);

/// F(x, z).
[[nodiscard]] Vec reservoir_rhs(const ReservoirModel& model, const Vec& x, const Vec& z);

/// D_x F(x, z), analytic for every model.
[[nodiscard]] Mat jacobian_x(const ReservoirModel& model, const Vec& x, const Vec& z);

using Observation = std::function<Vec(const Vec&)>;

/// Observation of component `index` of the source state.
[[nodiscard]] Observation observe_component(int index);

/// Observations omega(phi^t m) of a source orbit. The source state at drive
/// start is phi^{time_offset}(anchor).
struct DrivenSignal {
    SourceSystem source;
    Observation observation;
    int observation_dim = 1;
    Vec anchor;
    double time_offset = 0.0;
};

struct DriveResult {
    Trajectory source;
    Trajectory reservoir;
};

/// Integrates source and reservoir together as one (q + N)-dimensional ODE.
/// t1 == t0 yields the single initial point.
[[nodiscard]] DriveResult drive_coupled(const ReservoirModel& model, const DrivenSignal& signal,
                                        const Vec& x0, double t0, double t1,
                                        const IntegratorConfig& cfg = {});

/// Reservoir component of drive_coupled.
[[nodiscard]] Trajectory drive(const ReservoirModel& model, const DrivenSignal& signal,
                               const Vec& x0, double t0, double t1,
                               const IntegratorConfig& cfg = {});

/// Sample-based check of v^T D_x F(w, z) v < -delta |v|^2.
///
/// The verdict only means that no counterexample was found among the given
/// samples; it is not a proof over the whole region.
struct ContractionCertificate {
    double max_quadratic_form = 0.0;  // max over samples of lambda_max(sym(D_x F))
    double delta = 0.0;               // -max_quadratic_form
    std::size_t state_samples = 0;
    std::size_t input_samples = 0;
    bool verdict = false;             // max_quadratic_form < 0
};

[[nodiscard]] ContractionCertificate contraction_certificate(const ReservoirModel& model,
                                                             std::span<const Vec> state_samples,
                                                             std::span<const Vec> input_samples);

struct StabilityProbe {
    std::vector<double> times;
    std::vector<double> distances;  // |x(t) - y(t)|
    double rate = 0.0;              // fitted exponential decay rate
    double log_k = 0.0;             // fitted intercept: log |x - y| ~ log_k - rate t
    bool fitted = false;            // false when too few points lie above the noise floor
};

/// Drives two copies of the reservoir from x0 and y0 with the same signal and
/// fits an exponential decay to their distance over the second half of the
/// window, ignoring points below the integrator noise floor.
[[nodiscard]] StabilityProbe stability_probe(const ReservoirModel& model,
                                             const DrivenSignal& signal, const Vec& x0,
                                             const Vec& y0, double t0, double t1,
                                             const IntegratorConfig& cfg = {});

} // namespace resv
