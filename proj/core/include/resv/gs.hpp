#pragma once

#include "resv/dynamics.hpp"
#include "resv/reservoir.hpp"
#include "resv/types.hpp"

#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace resv {

enum class GSMethod { integral, washout, closed_form };

[[nodiscard]] std::string_view to_string(GSMethod method) noexcept;

/// One evaluation of the generalised synchronisation f at a source point.
struct GSSample {
    double t = 0.0;       // orbit time of `point` (0 for isolated evaluations)
    Vec point;            // m
    Vec value;            // f(m)
    GSMethod method = GSMethod::integral;
    double error_bound = 0.0;
    double horizon = 0.0;  // quadrature horizon or washout time
};

/// f(m) = int_0^T exp(-A tau) C omega(phi^{-tau} m) dtau by composite Simpson.
///
/// `step` is rounded down so that the number of panels is a multiple of 4;
/// step <= 0 selects horizon / 2000. The reported bound is the sum of
/// - the Richardson estimate |S_h - S_2h| / 15,
/// - the tail |C| sup|omega| exp(-sigma_min T) / sigma_min with sup|omega|
///   taken as 1.1 x the maximum along the computed backward orbit,
/// - 10 (rtol sup|omega| + atol) |C| / sigma_min for the orbit itself.
/// Throws DivergenceError naming the first unreachable tau when the backward
/// orbit blows up.
[[nodiscard]] GSSample gs_integral(const LinearReservoir& res, const SourceSystem& source,
                                   const Observation& omega, const Vec& m, double horizon,
                                   double step = 0.0, const IntegratorConfig& cfg = {});

struct WashoutOptions {
    double washout = 35.0;
    double horizon = 100.0;
    double sample_dt = 0.02;
    Vec x0;                     // empty: zero state
    double probe_offset = 0.1;  // initial separation of the stability probe
};

/// Drives the reservoir from x0 along the orbit of m0 and reports the state
/// at t >= washout as f(phi^t m0).
///
/// Bounds: for a linear reservoir the exact contraction estimate
/// exp(-sigma_min T_w) (|x0| + |C| sup|omega| / sigma_min); otherwise the
/// fitted stability probe K exp(-delta T_w), with K scaled from the probe
/// separation to 1.1 x the largest excursion of the driven state from x0.
[[nodiscard]] std::vector<GSSample> gs_washout(const ReservoirModel& model,
                                               const SourceSystem& source,
                                               const Observation& omega, int observation_dim,
                                               const Vec& m0, const WashoutOptions& opts,
                                               const IntegratorConfig& cfg = {});

/// f(m*) = A^{-1} C omega(m*) at a fixed point of the source.
[[nodiscard]] Vec gs_fixed_point(const LinearReservoir& res, const Vec& omega_value);

using GSMap = std::function<Vec(const Vec&)>;

/// | (f(phi^D m) - f(phi^{-D} m)) / 2D - F(f(m), omega(m)) |, the residual of
/// L_V f = F(f, omega) with a central-difference Lie derivative.
[[nodiscard]] double pde_residual(const GSMap& f, const SourceSystem& source,
                                  const ReservoirModel& model, const Observation& omega,
                                  const Vec& m, double delta, const IntegratorConfig& cfg = {});

/// Header `t,m_0..m_{q-1},f_0..f_{N-1},err_bound,method`.
void write_gs_samples_csv(std::ostream& out, std::span<const GSSample> samples);

} // namespace resv
