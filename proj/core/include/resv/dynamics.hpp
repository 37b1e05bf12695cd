#pragma once

#include "resv/types.hpp"

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace resv {

using VectorField = std::function<Vec(const Vec&)>;
using JacobianField = std::function<Mat(const Vec&)>;

struct NamedPoint {
    std::string name;
    Vec point;
};

/// Autonomous vector field on R^q together with its (optional) analytic
/// Jacobian and any known fixed points.
struct SourceSystem {
    std::string name;
    int dim = 0;
    VectorField rhs;
    JacobianField jacobian;  // empty: finite differences are used
    std::vector<NamedPoint> fixed_points;

    /// Throws std::out_of_range for an unknown name.
    [[nodiscard]] const Vec& fixed_point(std::string_view point_name) const;
};

struct IntegratorConfig {
    double rtol = 1e-9;
    double atol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    double initial_step = 0.0;  // 0: chosen automatically
    double divergence_norm = 1e6;
    std::size_t max_steps = 50'000'000;

    /// Throws std::invalid_argument unless rtol, atol, max_step > 0.
    void validate() const;
};

/// Accepted integrator steps with dense output.
///
/// Times are strictly monotone in the direction of integration: increasing for
/// forward runs, decreasing for backward runs. When derivatives are stored the
/// trajectory interpolates with cubic Hermite polynomials, otherwise linearly.
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(std::vector<double> times, std::vector<Vec> states,
               std::vector<Vec> derivatives = {});

    [[nodiscard]] std::size_t size() const noexcept { return times_.size(); }
    [[nodiscard]] bool empty() const noexcept { return times_.empty(); }
    [[nodiscard]] int dim() const noexcept {
        return states_.empty() ? 0 : static_cast<int>(states_.front().size());
    }
    [[nodiscard]] const std::vector<double>& times() const noexcept { return times_; }
    [[nodiscard]] const std::vector<Vec>& states() const noexcept { return states_; }
    [[nodiscard]] const std::vector<Vec>& derivatives() const noexcept { return derivatives_; }
    [[nodiscard]] bool has_derivatives() const noexcept { return !derivatives_.empty(); }
    [[nodiscard]] double t_begin() const { return times_.front(); }
    [[nodiscard]] double t_end() const { return times_.back(); }
    [[nodiscard]] const Vec& front() const { return states_.front(); }
    [[nodiscard]] const Vec& back() const { return states_.back(); }

    /// Dense output at t, which must lie within the covered time span.
    [[nodiscard]] Vec at(double t) const;
    [[nodiscard]] std::vector<Vec> sample(std::span<const double> ts) const;

    /// Sub-trajectory of components [first, first + count).
    [[nodiscard]] Trajectory components(int first, int count) const;

private:
    std::vector<double> times_;
    std::vector<Vec> states_;
    std::vector<Vec> derivatives_;
};

/// Uniform grid t0, t0 + dt, ... up to and including t1 (within dt * 1e-9).
[[nodiscard]] std::vector<double> uniform_grid(double t0, double t1, double dt);

/// Dormand-Prince 5(4) with PI step control. t1 < t0 integrates backwards
/// (the negated field is integrated forward in reversed time). t1 == t0
/// returns the single-point trajectory. Throws DivergenceError on non-finite
/// states, state norms above cfg.divergence_norm, or step-size underflow.
[[nodiscard]] Trajectory integrate_field(const VectorField& field, const Vec& x0, double t0,
                                         double t1, const IntegratorConfig& cfg = {});

[[nodiscard]] Trajectory integrate(const SourceSystem& system, const Vec& x0, double t0, double t1,
                                   const IntegratorConfig& cfg = {});

/// phi^t(m).
[[nodiscard]] Vec flow(const SourceSystem& system, const Vec& m, double t,
                       const IntegratorConfig& cfg = {});

/// Central differences with step h = 1e-6 * (1 + |m|).
[[nodiscard]] Mat finite_difference_jacobian(const VectorField& field, const Vec& m);

/// Analytic Jacobian when the system provides one, finite differences otherwise.
[[nodiscard]] Mat jacobian(const SourceSystem& system, const Vec& m);

/// Derivative of phi^t at m, from the variational equation M' = J(phi^s m) M.
[[nodiscard]] Mat tangent_flow(const SourceSystem& system, const Vec& m, double t,
                               const IntegratorConfig& cfg = {});

struct GrowthBoundReport {
    std::vector<Vec> samples;
    std::vector<double> t_grid;
    Mat norms;                       // samples x t_grid; NaN where not computed
    std::vector<double> sup_norms;   // sup over samples, per t
    double K = 0.0;
    double c = 0.0;                  // exponent in units of sigma_min
    double fit_residual = 0.0;       // RMS residual of the log-linear fit
    bool hypothesis_holds = false;   // c < 1
    bool diverged = false;
    std::string divergence_message;
};

/// Estimates sup_m |T_m phi^{-t}| on a time grid and fits K exp(c sigma_min t).
/// A backward divergence stops the probe and returns the partial report with
/// `diverged` set; the fit then uses only the fully computed times.
[[nodiscard]] GrowthBoundReport growth_probe(const SourceSystem& system,
                                             std::span<const Vec> sample_points,
                                             std::span<const double> t_grid, double sigma_min,
                                             const IntegratorConfig& cfg = {});

/// Lorenz-63 with (sigma, rho, beta) = (10, 28, 8/3). Registers the fixed
/// point "m_star" = (6 sqrt 2, 6 sqrt 2, 27).
[[nodiscard]] SourceSystem lorenz63();

/// Rotation u' = -v, v' = u.
[[nodiscard]] SourceSystem circle();

/// x' = M x.
[[nodiscard]] SourceSystem linear_system(const Mat& m);

/// x' = 0 on R^q; every point is fixed.
[[nodiscard]] SourceSystem zero_system(int q);

} // namespace resv
