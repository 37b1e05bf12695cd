#include "resv/gs.hpp"

#include "resv/errors.hpp"
#include "resv/io.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace resv {

std::string_view to_string(GSMethod method) noexcept {
    switch (method) {
        case GSMethod::integral: return "integral";
        case GSMethod::washout: return "washout";
        case GSMethod::closed_form: return "closed_form";
    }
    return "unknown";
}

GSSample gs_integral(const LinearReservoir& res, const SourceSystem& source,
                     const Observation& omega, const Vec& m, double horizon, double step,
                     const IntegratorConfig& cfg) {
    if (!(horizon > 0.0)) throw std::invalid_argument("quadrature horizon must be positive");
    if (step <= 0.0) step = horizon / 2000.0;
    const auto panels = static_cast<long>(4 * std::ceil(horizon / (4.0 * step) - 1e-9));
    const double h = horizon / static_cast<double>(panels);

    // keep Hermite interpolation error far below the quadrature error
    IntegratorConfig back_cfg = cfg;
    back_cfg.max_step = std::min(cfg.max_step, h);
    Trajectory orbit;
    try {
        orbit = integrate(source, m, 0.0, -horizon, back_cfg);
    } catch (const DivergenceError& e) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "backward orbit diverged; first unreachable tau after " << -e.last_valid_time();
        throw DivergenceError(msg.str(), e.last_valid_time());
    }

    const SpectralDecomposition& sd = res.spectral();
    const Mat& q = sd.eigenvectors();
    const Vec& lambda = sd.eigenvalues();
    const Mat qtc = q.transpose() * res.C();
    const auto n = static_cast<Eigen::Index>(lambda.size());

    Vec fine = Vec::Zero(n);    // Simpson with step h, eigenbasis
    Vec coarse = Vec::Zero(n);  // Simpson with step 2h
    double sup_omega = 0.0;
    for (long k = 0; k <= panels; ++k) {
        const double tau = static_cast<double>(k) * h;
        const Vec z = omega(orbit.at(-tau));
        sup_omega = std::max(sup_omega, z.norm());
        const Vec g = (-tau * lambda).array().exp().matrix().cwiseProduct(qtc * z);

        const double wf = (k == 0 || k == panels) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        fine += wf * g;
        if (k % 2 == 0) {
            const long kc = k / 2;
            const long pc = panels / 2;
            const double wc = (kc == 0 || kc == pc) ? 1.0 : (kc % 2 == 1 ? 4.0 : 2.0);
            coarse += wc * g;
        }
    }
    fine *= h / 3.0;
    coarse *= 2.0 * h / 3.0;

    sup_omega *= 1.1;
    const double c_norm = spectral_norm(res.C());
    const double smin = sd.sigma_min();
    const double quad_err = (fine - coarse).norm() / 15.0;
    const double tail = c_norm * sup_omega * std::exp(-smin * horizon) / smin;
    const double orbit_err = 10.0 * (cfg.rtol * sup_omega + cfg.atol) * c_norm / smin;

    GSSample s;
    s.point = m;
    s.value = q * fine;
    s.method = GSMethod::integral;
    s.error_bound = quad_err + tail + orbit_err;
    s.horizon = horizon;
    return s;
}

std::vector<GSSample> gs_washout(const ReservoirModel& model, const SourceSystem& source,
                                 const Observation& omega, int observation_dim, const Vec& m0,
                                 const WashoutOptions& opts, const IntegratorConfig& cfg) {
    if (!(opts.washout >= 0.0) || !(opts.horizon > opts.washout))
        throw std::invalid_argument("washout must lie in [0, horizon)");
    const int n = state_dim(model);
    const Vec x0 = opts.x0.size() == 0 ? Vec::Zero(n) : opts.x0;

    DrivenSignal signal{source, omega, observation_dim, m0, 0.0};
    const DriveResult run = drive_coupled(model, signal, x0, 0.0, opts.horizon, cfg);

    double sup_omega = 0.0;
    double excursion = 0.0;
    for (std::size_t k = 0; k < run.source.size(); ++k) {
        sup_omega = std::max(sup_omega, omega(run.source.states()[k]).norm());
        excursion = std::max(excursion, (run.reservoir.states()[k] - x0).norm());
    }
    sup_omega *= 1.1;

    double bound = 0.0;
    if (const auto* lin = std::get_if<LinearReservoir>(&model)) {
        const double smin = lin->spectral().sigma_min();
        bound = std::exp(-smin * opts.washout) *
                (x0.norm() + spectral_norm(lin->C()) * sup_omega / smin);
    } else {
        const Vec y0 = x0 + Vec::Constant(n, opts.probe_offset / std::sqrt(static_cast<double>(n)));
        const StabilityProbe probe = stability_probe(model, signal, x0, y0, 0.0, opts.horizon, cfg);
        const double scale = std::max(1.0, 1.1 * excursion / opts.probe_offset);
        double at_washout = 0.0;
        for (std::size_t k = 0; k < probe.times.size(); ++k) {
            if (probe.times[k] >= opts.washout) {
                at_washout = probe.distances[k];
                break;
            }
        }
        double fitted = probe.fitted ? std::exp(probe.log_k - probe.rate * opts.washout) : 0.0;
        const double floor = 10.0 * (cfg.atol + cfg.rtol * (x0.norm() + excursion));
        bound = scale * std::max(fitted, at_washout) + floor;
    }

    std::vector<GSSample> samples;
    for (double t : uniform_grid(opts.washout, opts.horizon, opts.sample_dt)) {
        GSSample s;
        s.t = t;
        s.point = run.source.at(t);
        s.value = run.reservoir.at(t);
        s.method = GSMethod::washout;
        s.error_bound = bound;
        s.horizon = opts.washout;
        samples.push_back(std::move(s));
    }
    return samples;
}

Vec gs_fixed_point(const LinearReservoir& res, const Vec& omega_value) {
    if (omega_value.size() != res.input_dim())
        throw std::invalid_argument("observation value has wrong dimension");
    return res.A().llt().solve(res.C() * omega_value);
}

double pde_residual(const GSMap& f, const SourceSystem& source, const ReservoirModel& model,
                    const Observation& omega, const Vec& m, double delta,
                    const IntegratorConfig& cfg) {
    if (!(delta > 0.0)) throw std::invalid_argument("difference step must be positive");
    const Vec ahead = flow(source, m, delta, cfg);
    const Vec behind = flow(source, m, -delta, cfg);
    const Vec lie = (f(ahead) - f(behind)) / (2.0 * delta);
    return (lie - reservoir_rhs(model, f(m), omega(m))).norm();
}

void write_gs_samples_csv(std::ostream& out, std::span<const GSSample> samples) {
    if (samples.empty()) {
        out << "t,err_bound,method\n";
        return;
    }
    const auto q = samples.front().point.size();
    const auto n = samples.front().value.size();
    out << "t";
    for (Eigen::Index i = 0; i < q; ++i) out << ",m_" << i;
    for (Eigen::Index i = 0; i < n; ++i) out << ",f_" << i;
    out << ",err_bound,method\n";
    for (const auto& s : samples) {
        out << io::format_double(s.t);
        for (Eigen::Index i = 0; i < q; ++i) out << ',' << io::format_double(s.point[i]);
        for (Eigen::Index i = 0; i < n; ++i) out << ',' << io::format_double(s.value[i]);
        out << ',' << io::format_double(s.error_bound) << ',' << to_string(s.method) << '\n';
    }
}

} // namespace resv
