#include "resv/dynamics.hpp"

#include "resv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace resv {

const Vec& SourceSystem::fixed_point(std::string_view point_name) const {
    for (const auto& p : fixed_points)
        if (p.name == point_name) return p.point;
    throw std::out_of_range("unknown fixed point: " + std::string(point_name));
}

void IntegratorConfig::validate() const {
    if (!(rtol > 0.0) || !(atol > 0.0))
        throw std::invalid_argument("integrator tolerances must be positive");
    if (!(max_step > 0.0)) throw std::invalid_argument("max_step must be positive");
    if (!(divergence_norm > 0.0)) throw std::invalid_argument("divergence_norm must be positive");
}

// ---------------------------------------------------------------------------
// Trajectory

Trajectory::Trajectory(std::vector<double> times, std::vector<Vec> states,
                       std::vector<Vec> derivatives)
    : times_(std::move(times)), states_(std::move(states)), derivatives_(std::move(derivatives)) {
    if (times_.empty()) throw std::invalid_argument("trajectory must contain at least one point");
    if (times_.size() != states_.size())
        throw std::invalid_argument("trajectory times and states differ in length");
    if (!derivatives_.empty() && derivatives_.size() != states_.size())
        throw std::invalid_argument("trajectory derivatives and states differ in length");
    if (times_.size() > 1) {
        const bool increasing = times_[1] > times_[0];
        for (std::size_t i = 1; i < times_.size(); ++i) {
            const bool ok = increasing ? times_[i] > times_[i - 1] : times_[i] < times_[i - 1];
            if (!ok) throw std::invalid_argument("trajectory times must be strictly monotone");
        }
    }
}

Vec Trajectory::at(double t) const {
    const std::size_t n = times_.size();
    if (n == 1) {
        if (t != times_[0]) throw std::out_of_range("time outside single-point trajectory");
        return states_[0];
    }
    const bool increasing = times_[1] > times_[0];
    const double lo = increasing ? times_.front() : times_.back();
    const double hi = increasing ? times_.back() : times_.front();
    const double slack = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
    if (t < lo - slack || t > hi + slack) {
        std::ostringstream msg;
        msg << "time " << t << " outside trajectory span [" << lo << ", " << hi << "]";
        throw std::out_of_range(msg.str());
    }

    // index k with t in the closed interval between times_[k] and times_[k+1]
    std::size_t k = 0;
    if (increasing) {
        auto it = std::upper_bound(times_.begin(), times_.end(), t);
        k = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
    } else {
        auto it = std::upper_bound(times_.begin(), times_.end(), t, std::greater<>());
        k = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
    }
    k = std::min(k, n - 2);

    const double t0 = times_[k];
    const double h = times_[k + 1] - t0;
    const double s = std::clamp((t - t0) / h, 0.0, 1.0);
    if (derivatives_.empty()) return (1.0 - s) * states_[k] + s * states_[k + 1];

    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    const double h10 = s3 - 2.0 * s2 + s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h11 = s3 - s2;
    return h00 * states_[k] + (h10 * h) * derivatives_[k] + h01 * states_[k + 1] +
           (h11 * h) * derivatives_[k + 1];
}

std::vector<Vec> Trajectory::sample(std::span<const double> ts) const {
    std::vector<Vec> out;
    out.reserve(ts.size());
    for (double t : ts) out.push_back(at(t));
    return out;
}

Trajectory Trajectory::components(int first, int count) const {
    std::vector<Vec> s;
    s.reserve(size());
    for (const auto& x : states_) s.emplace_back(x.segment(first, count));
    std::vector<Vec> d;
    if (!derivatives_.empty()) {
        d.reserve(size());
        for (const auto& x : derivatives_) d.emplace_back(x.segment(first, count));
    }
    return Trajectory(times_, std::move(s), std::move(d));
}

std::vector<double> uniform_grid(double t0, double t1, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("grid spacing must be positive");
    if (t1 < t0) throw std::invalid_argument("grid end precedes start");
    const auto n = static_cast<std::size_t>(std::floor((t1 - t0) / dt + 1e-9));
    std::vector<double> grid;
    grid.reserve(n + 1);
    for (std::size_t k = 0; k <= n; ++k) grid.push_back(t0 + static_cast<double>(k) * dt);
    return grid;
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)

namespace {

namespace dp {
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - b_hat
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
}  // namespace dp

double rms_scaled(const Vec& v, const Vec& y0, const Vec& y1, double rtol, double atol) {
    const auto n = v.size();
    if (n == 0) return 0.0;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double sk = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double r = v[i] / sk;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

// Hairer & Wanner's starting step heuristic.
double initial_step(const VectorField& f, const Vec& y0, const Vec& f0, double span,
                    const IntegratorConfig& cfg) {
    const double d0 = rms_scaled(y0, y0, y0, cfg.rtol, cfg.atol);
    const double d1 = rms_scaled(f0, y0, y0, cfg.rtol, cfg.atol);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min({h0, span, cfg.max_step});
    const Vec y1 = y0 + h0 * f0;
    const Vec f1 = f(y1);
    const double d2 = rms_scaled(f1 - f0, y0, y0, cfg.rtol, cfg.atol) / h0;
    const double dmax = std::max(d1, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 1.0 / 5.0);
    return std::min({100.0 * h0, h1, span, cfg.max_step});
}

[[noreturn]] void diverge(const std::string& why, double t) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "integration diverged (" << why << "); last valid time " << t;
    throw DivergenceError(msg.str(), t);
}

}  // namespace

Trajectory integrate_field(const VectorField& field, const Vec& x0, double t0, double t1,
                           const IntegratorConfig& cfg) {
    cfg.validate();
    if (!x0.allFinite()) diverge("non-finite initial state", t0);

    const double dir = t1 >= t0 ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    // f in reversed time when integrating backwards
    auto f = [&](const Vec& y) -> Vec { return dir * field(y); };

    std::vector<double> times{t0};
    std::vector<Vec> states{x0};
    Vec k1 = f(x0);
    std::vector<Vec> derivs{dir * k1};
    if (span == 0.0) return Trajectory(std::move(times), std::move(states), std::move(derivs));

    double h = cfg.initial_step > 0.0 ? std::min(cfg.initial_step, span)
                                      : initial_step(f, x0, k1, span, cfg);
    constexpr double beta = 0.04;
    constexpr double expo = 0.2 - beta * 0.75;
    constexpr double safety = 0.9;
    double err_old = 1e-4;
    bool rejected_last = false;

    double s = 0.0;  // elapsed |t - t0|
    Vec y = x0;
    std::size_t steps = 0;

    while (s < span) {
        if (++steps > cfg.max_steps) diverge("step budget exhausted", t0 + dir * s);
        h = std::min(h, cfg.max_step);
        bool last = false;
        if (s + h >= span * (1.0 - 1e-15) || s + 1.01 * h >= span) {
            h = span - s;
            last = true;
        }
        const double h_min = 1e-14 * std::max(1.0, std::abs(t0 + dir * s));
        if (h < h_min) diverge("step size underflow", t0 + dir * s);

        using namespace dp;
        const Vec k2 = f(y + h * (a21 * k1));
        const Vec k3 = f(y + h * (a31 * k1 + a32 * k2));
        const Vec k4 = f(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Vec k5 = f(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Vec k6 = f(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Vec y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Vec k7 = f(y_new);
        const Vec err_vec = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double err = rms_scaled(err_vec, y, y_new, cfg.rtol, cfg.atol);
        if (!std::isfinite(err)) err = 1e10;

        if (err <= 1.0) {
            if (!y_new.allFinite()) diverge("non-finite state", t0 + dir * s);
            if (y_new.norm() > cfg.divergence_norm)
                diverge("state norm exceeded bound", t0 + dir * s);

            s = last ? span : s + h;
            y = y_new;
            k1 = k7;
            times.push_back(last ? t1 : t0 + dir * s);
            states.push_back(y);
            derivs.push_back(dir * k7);

            double fac = 10.0;
            if (err > 0.0)
                fac = std::clamp(safety / (std::pow(err, expo) * std::pow(err_old, -beta)), 0.2, 10.0);
            if (rejected_last) fac = std::min(fac, 1.0);
            h *= fac;
            err_old = std::max(err, 1e-4);
            rejected_last = false;
        } else {
            const double fac = std::max(0.2, safety * std::pow(err, -0.2));
            h *= fac;
            rejected_last = true;
        }
    }
    return Trajectory(std::move(times), std::move(states), std::move(derivs));
}

Trajectory integrate(const SourceSystem& system, const Vec& x0, double t0, double t1,
                     const IntegratorConfig& cfg) {
    if (x0.size() != system.dim)
        throw std::invalid_argument("initial state dimension does not match system");
    return integrate_field(system.rhs, x0, t0, t1, cfg);
}

Vec flow(const SourceSystem& system, const Vec& m, double t, const IntegratorConfig& cfg) {
    if (t == 0.0) return m;
    return integrate(system, m, 0.0, t, cfg).back();
}

Mat finite_difference_jacobian(const VectorField& field, const Vec& m) {
    const double h = 1e-6 * (1.0 + m.norm());
    const Vec f0 = field(m);
    Mat jac(f0.size(), m.size());
    Vec probe = m;
    for (Eigen::Index j = 0; j < m.size(); ++j) {
        probe[j] = m[j] + h;
        const Vec fp = field(probe);
        probe[j] = m[j] - h;
        const Vec fm = field(probe);
        probe[j] = m[j];
        jac.col(j) = (fp - fm) / (2.0 * h);
    }
    return jac;
}

Mat jacobian(const SourceSystem& system, const Vec& m) {
    if (system.jacobian) return system.jacobian(m);
    return finite_difference_jacobian(system.rhs, m);
}

Mat tangent_flow(const SourceSystem& system, const Vec& m, double t, const IntegratorConfig& cfg) {
    const int q = system.dim;
    if (m.size() != q) throw std::invalid_argument("state dimension does not match system");
    if (t == 0.0) return Mat::Identity(q, q);

    VectorField augmented = [&system, q](const Vec& y) -> Vec {
        const Vec x = y.head(q);
        const Eigen::Map<const Mat> M(y.data() + q, q, q);
        Vec out(y.size());
        out.head(q) = system.rhs(x);
        Eigen::Map<Mat>(out.data() + q, q, q) = jacobian(system, x) * M;
        return out;
    };
    Vec y0(q + q * q);
    y0.head(q) = m;
    Eigen::Map<Mat>(y0.data() + q, q, q) = Mat::Identity(q, q);
    const Vec y1 = integrate_field(augmented, y0, 0.0, t, cfg).back();
    return Eigen::Map<const Mat>(y1.data() + q, q, q);
}

GrowthBoundReport growth_probe(const SourceSystem& system, std::span<const Vec> sample_points,
                               std::span<const double> t_grid, double sigma_min,
                               const IntegratorConfig& cfg) {
    if (!(sigma_min > 0.0)) throw std::invalid_argument("sigma_min must be positive");
    if (t_grid.empty()) throw std::invalid_argument("empty time grid");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > 0.0) || (i > 0 && t_grid[i] <= t_grid[i - 1]))
            throw std::invalid_argument("time grid must be positive and increasing");
    }
    if (sample_points.empty()) throw std::invalid_argument("no sample points");

    GrowthBoundReport rep;
    rep.samples.assign(sample_points.begin(), sample_points.end());
    rep.t_grid.assign(t_grid.begin(), t_grid.end());
    const auto ns = static_cast<Eigen::Index>(sample_points.size());
    const auto nt = static_cast<Eigen::Index>(t_grid.size());
    rep.norms = Mat::Constant(ns, nt, std::numeric_limits<double>::quiet_NaN());

    Eigen::Index complete_times = nt;
    try {
        for (Eigen::Index j = 0; j < nt; ++j) {
            for (Eigen::Index i = 0; i < ns; ++i) {
                const Mat T = tangent_flow(system, sample_points[i], -t_grid[j], cfg);
                rep.norms(i, j) = Eigen::JacobiSVD<Mat>(T).singularValues()(0);
            }
        }
    } catch (const DivergenceError& e) {
        rep.diverged = true;
        rep.divergence_message = e.what();
        for (Eigen::Index j = 0; j < nt; ++j) {
            if (rep.norms.col(j).hasNaN()) {
                complete_times = j;
                break;
            }
        }
    }

    for (Eigen::Index j = 0; j < complete_times; ++j) rep.sup_norms.push_back(rep.norms.col(j).maxCoeff());

    // log sup|T phi^{-t}| = log K + c * sigma_min * t
    const auto n = static_cast<Eigen::Index>(rep.sup_norms.size());
    if (n >= 1) {
        Mat design(n, 2);
        Vec rhs(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            design(j, 0) = 1.0;
            design(j, 1) = sigma_min * t_grid[j];
            rhs[j] = std::log(rep.sup_norms[j]);
        }
        Vec coef(2);
        if (n == 1) {
            coef << 0.0, rhs[0] / (sigma_min * t_grid[0]);
        } else {
            coef = design.colPivHouseholderQr().solve(rhs);
        }
        rep.K = std::exp(coef[0]);
        rep.c = coef[1];
        rep.fit_residual = std::sqrt((design * coef - rhs).squaredNorm() / static_cast<double>(n));
        rep.hypothesis_holds = rep.c < 1.0;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Concrete systems

SourceSystem lorenz63() {
    static constexpr double sigma = 10.0, rho = 28.0, beta = 8.0 / 3.0;
    SourceSystem s;
    s.name = "lorenz63";
    s.dim = 3;
    s.rhs = [](const Vec& m) -> Vec {
        Vec d(3);
        d << sigma * (m[1] - m[0]), m[0] * (rho - m[2]) - m[1], m[0] * m[1] - beta * m[2];
        return d;
    };
    s.jacobian = [](const Vec& m) -> Mat {
        Mat j(3, 3);
        j << -sigma, sigma, 0.0,
             rho - m[2], -1.0, -m[0],
             m[1], m[0], -beta;
        return j;
    };
    const double r = 6.0 * std::numbers::sqrt2;
    s.fixed_points.push_back({"m_star", (Vec(3) << r, r, 27.0).finished()});
    s.fixed_points.push_back({"m_minus", (Vec(3) << -r, -r, 27.0).finished()});
    s.fixed_points.push_back({"origin", Vec::Zero(3)});
    return s;
}

SourceSystem circle() {
    SourceSystem s;
    s.name = "circle";
    s.dim = 2;
    s.rhs = [](const Vec& m) -> Vec { return (Vec(2) << -m[1], m[0]).finished(); };
    s.jacobian = [](const Vec&) -> Mat { return (Mat(2, 2) << 0.0, -1.0, 1.0, 0.0).finished(); };
    s.fixed_points.push_back({"origin", Vec::Zero(2)});
    return s;
}

SourceSystem linear_system(const Mat& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("linear system matrix must be square");
    SourceSystem s;
    s.name = "linear";
    s.dim = static_cast<int>(m.rows());
    s.rhs = [m](const Vec& x) -> Vec { return m * x; };
    s.jacobian = [m](const Vec&) -> Mat { return m; };
    s.fixed_points.push_back({"origin", Vec::Zero(s.dim)});
    return s;
}

SourceSystem zero_system(int q) {
    SourceSystem s;
    s.name = "zero";
    s.dim = q;
    s.rhs = [q](const Vec&) -> Vec { return Vec::Zero(q); };
    s.jacobian = [q](const Vec&) -> Mat { return Mat::Zero(q, q); };
    return s;
}

} // namespace resv
