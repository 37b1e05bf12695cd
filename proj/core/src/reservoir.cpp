#include "resv/reservoir.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace resv {

LinearReservoir::LinearReservoir(Mat a, Mat c)
    : a_(std::move(a)), c_(std::move(c)), spectral_(a_) {
    if (c_.rows() != a_.rows())
        throw std::invalid_argument("input matrix C must have as many rows as A");
    if (c_.cols() < 1) throw std::invalid_argument("input matrix C has no columns");
}

void LeakyESN::validate() const {
    if (!(alpha > 0.0)) throw std::invalid_argument("leak rate must be positive");
    if (A.rows() != A.cols()) throw std::invalid_argument("ESN matrix A must be square");
    if (C.rows() != A.rows() || b.size() != A.rows())
        throw std::invalid_argument("ESN shapes are inconsistent");
}

namespace {
template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
}  // namespace

int state_dim(const ReservoirModel& model) {
    return std::visit(overloaded{
                          [](const LinearReservoir& m) { return m.state_dim(); },
                          [](const LeakyESN& m) { return static_cast<int>(m.A.rows()); },
                          [](const SinusoidReservoir&) { return 2; },
                      },
                      model);
}

int input_dim(const ReservoirModel& model) {
    return std::visit(overloaded{
                          [](const LinearReservoir& m) { return m.input_dim(); },
                          [](const LeakyESN& m) { return static_cast<int>(m.C.cols()); },
                          [](const SinusoidReservoir&) { return 1; },
                      },
                      model);
}

Vec reservoir_rhs(const ReservoirModel& model, const Vec& x, const Vec& z) {
    return std::visit(
        overloaded{
            [&](const LinearReservoir& m) -> Vec { return -m.A() * x + m.C() * z; },
            [&](const LeakyESN& m) -> Vec {
                return -m.alpha * x + (m.A * x + m.C * z + m.b).array().tanh().matrix();
            },
            [&](const SinusoidReservoir& m) -> Vec {
                constexpr double two_pi = 2.0 * std::numbers::pi;
                Vec d(2);
                d << std::sin(two_pi * x[0]) + m.lambda * std::sin(z[0]),
                    std::sin(two_pi * x[1]) + m.lambda * std::cos(z[0]);
                return d;
            },
        },
        model);
}

Mat jacobian_x(const ReservoirModel& model, const Vec& x, const Vec& z) {
    return std::visit(
        overloaded{
            [&](const LinearReservoir& m) -> Mat { return -m.A(); },
            [&](const LeakyESN& m) -> Mat {
                const Vec th = (m.A * x + m.C * z + m.b).array().tanh();
                const Vec sech2 = 1.0 - th.array().square();
                Mat j = sech2.asDiagonal() * m.A;
                j.diagonal().array() -= m.alpha;
                return j;
            },
            [&](const SinusoidReservoir&) -> Mat {
                constexpr double two_pi = 2.0 * std::numbers::pi;
                Mat j = Mat::Zero(2, 2);
                j(0, 0) = two_pi * std::cos(two_pi * x[0]);
                j(1, 1) = two_pi * std::cos(two_pi * x[1]);
                return j;
            },
        },
        model);
}

Observation observe_component(int index) {
    return [index](const Vec& m) -> Vec { return Vec::Constant(1, m[index]); };
}

namespace {

void check_signal(const ReservoirModel& model, const DrivenSignal& signal, const Vec& x0) {
    if (x0.size() != state_dim(model))
        throw std::invalid_argument("reservoir initial state has wrong dimension");
    if (signal.anchor.size() != signal.source.dim)
        throw std::invalid_argument("signal anchor has wrong dimension");
    if (signal.observation_dim != input_dim(model))
        throw std::invalid_argument("observation dimension does not match reservoir input");
}

Vec signal_start(const DrivenSignal& signal, const IntegratorConfig& cfg) {
    return flow(signal.source, signal.anchor, signal.time_offset, cfg);
}

}  // namespace

DriveResult drive_coupled(const ReservoirModel& model, const DrivenSignal& signal, const Vec& x0,
                          double t0, double t1, const IntegratorConfig& cfg) {
    check_signal(model, signal, x0);
    if (t1 < t0) throw std::invalid_argument("drive requires t1 >= t0");
    const int q = signal.source.dim;
    const int n = state_dim(model);

    VectorField field = [&](const Vec& y) -> Vec {
        const Vec m = y.head(q);
        Vec out(q + n);
        out.head(q) = signal.source.rhs(m);
        out.tail(n) = reservoir_rhs(model, y.tail(n), signal.observation(m));
        return out;
    };
    Vec y0(q + n);
    y0.head(q) = signal_start(signal, cfg);
    y0.tail(n) = x0;
    const Trajectory full = integrate_field(field, y0, t0, t1, cfg);
    return {full.components(0, q), full.components(q, n)};
}

Trajectory drive(const ReservoirModel& model, const DrivenSignal& signal, const Vec& x0, double t0,
                 double t1, const IntegratorConfig& cfg) {
    return drive_coupled(model, signal, x0, t0, t1, cfg).reservoir;
}

ContractionCertificate contraction_certificate(const ReservoirModel& model,
                                               std::span<const Vec> state_samples,
                                               std::span<const Vec> input_samples) {
    if (state_samples.empty() || input_samples.empty())
        throw std::invalid_argument("contraction certificate needs samples");
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& w : state_samples) {
        for (const auto& z : input_samples) {
            const Mat d = jacobian_x(model, w, z);
            const Mat sym = 0.5 * (d + d.transpose());
            Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
            worst = std::max(worst, es.eigenvalues().maxCoeff());
        }
    }
    ContractionCertificate cert;
    cert.max_quadratic_form = worst;
    cert.delta = -worst;
    cert.state_samples = state_samples.size();
    cert.input_samples = input_samples.size();
    cert.verdict = worst < 0.0;
    return cert;
}

StabilityProbe stability_probe(const ReservoirModel& model, const DrivenSignal& signal,
                               const Vec& x0, const Vec& y0, double t0, double t1,
                               const IntegratorConfig& cfg) {
    check_signal(model, signal, x0);
    if (y0.size() != x0.size()) throw std::invalid_argument("probe states differ in dimension");
    if (!(t1 > t0)) throw std::invalid_argument("stability probe requires t1 > t0");
    const int q = signal.source.dim;
    const int n = state_dim(model);

    VectorField field = [&](const Vec& y) -> Vec {
        const Vec m = y.head(q);
        const Vec z = signal.observation(m);
        Vec out(q + 2 * n);
        out.head(q) = signal.source.rhs(m);
        out.segment(q, n) = reservoir_rhs(model, y.segment(q, n), z);
        out.tail(n) = reservoir_rhs(model, y.tail(n), z);
        return out;
    };
    Vec start(q + 2 * n);
    start.head(q) = signal_start(signal, cfg);
    start.segment(q, n) = x0;
    start.tail(n) = y0;
    const Trajectory traj = integrate_field(field, start, t0, t1, cfg);

    StabilityProbe probe;
    probe.times = traj.times();
    probe.distances.reserve(traj.size());
    for (const auto& s : traj.states()) probe.distances.push_back((s.segment(q, n) - s.tail(n)).norm());

    // log-linear least squares over the second half, above the noise floor
    const double t_mid = t0 + 0.5 * (t1 - t0);
    double sw = 0, st = 0, sl = 0, stt = 0, stl = 0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double t = probe.times[k];
        const double d = probe.distances[k];
        const Vec& s = traj.states()[k];
        const double floor = 10.0 * (cfg.atol + cfg.rtol * s.tail(2 * n).cwiseAbs().maxCoeff());
        if (t < t_mid || !(d > floor)) continue;
        const double l = std::log(d);
        sw += 1.0;
        st += t;
        sl += l;
        stt += t * t;
        stl += t * l;
    }
    const double det = sw * stt - st * st;
    if (sw >= 2.0 && det > 0.0) {
        const double slope = (sw * stl - st * sl) / det;
        probe.rate = -slope;
        probe.log_k = (sl - slope * st) / sw;
        probe.fitted = true;
    } else {
        probe.rate = std::numeric_limits<double>::infinity();
        probe.log_k = -std::numeric_limits<double>::infinity();
    }
    return probe;
}

} // namespace resv
