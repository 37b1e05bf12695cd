#include "resv/stochastic.hpp"

#include "resv/errors.hpp"
#include "resv/io.hpp"
#include "resv/linalg.hpp"
#include "resv/parallel.hpp"
#include "resv/random.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <stdexcept>

namespace resv {

NoiseAmplitude constant_noise(double sigma) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("noise amplitude must be non-negative");
    return [sigma](const Vec&) { return sigma; };
}

namespace {

void guard_step(const Mat& a, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    const double smax = spectral_norm(a);
    if (!(dt * smax < 0.5))
        throw StepSizeError("Euler-Maruyama step violates dt * sigma_max(A) < 0.5 (dt = " +
                            io::format_double(dt) + ", sigma_max = " + io::format_double(smax) + ")");
}

std::size_t step_count(double duration, double dt) {
    if (!(duration >= 0.0)) throw std::invalid_argument("duration must be non-negative");
    return static_cast<std::size_t>(std::llround(duration / dt));
}

double slowest_rate(const Mat& a) {
    const CVec ev = sorted_eigenvalues(a);
    double r = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < ev.size(); ++i) r = std::min(r, ev[i].real());
    if (!(r > 0.0)) throw std::invalid_argument("drift matrix is not stable");
    return r;
}

std::vector<double> row_major(const Mat& m) {
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) v.push_back(m(i, j));
    return v;
}

}  // namespace

SDEPath euler_maruyama(const LinearReservoir& res, const SourceSystem& source,
                       const Observation& omega, const NoiseAmplitude& sigma, const Vec& m0,
                       const Vec& x0, double dt, double duration, std::uint64_t seed,
                       const IntegratorConfig& cfg) {
    guard_step(res.A(), dt);
    if (x0.size() != res.state_dim()) throw std::invalid_argument("initial state has wrong dimension");
    const std::size_t steps = step_count(duration, dt);
    const double t_end = static_cast<double>(steps) * dt;
    const Trajectory orbit = integrate(source, m0, 0.0, t_end, cfg);

    const Mat& a = res.A();
    const Mat& c = res.C();
    const auto d = c.cols();
    const double sqdt = std::sqrt(dt);
    Rng rng(seed);

    SDEPath path;
    path.seed = seed;
    path.dt = dt;
    path.times.reserve(steps + 1);
    path.states.reserve(steps + 1);
    Vec x = x0;
    Vec xi(d);
    path.times.push_back(0.0);
    path.states.push_back(x);
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const Vec m = orbit.at(t);
        for (Eigen::Index i = 0; i < d; ++i) xi[i] = rng.normal();
        x = x + (-a * x + c * omega(m)) * dt + c * (sigma(m) * sqdt * xi);
        if (!x.allFinite()) throw DivergenceError("stochastic path became non-finite", t);
        path.times.push_back(static_cast<double>(k + 1) * dt);
        path.states.push_back(x);
    }
    return path;
}

SDEPath error_process(const SDEPath& path, const std::function<Vec(double)>& gs_reference) {
    SDEPath out;
    out.seed = path.seed;
    out.dt = path.dt;
    out.times = path.times;
    out.states.reserve(path.states.size());
    for (std::size_t k = 0; k < path.states.size(); ++k)
        out.states.push_back(path.states[k] - gs_reference(path.times[k]));
    return out;
}

SDEPath ou_simulate(const Mat& a, const Vec& b, const Vec& y0, double dt, double duration,
                    std::uint64_t seed) {
    guard_step(a, dt);
    if (b.size() != a.rows() || y0.size() != a.rows())
        throw std::invalid_argument("OU operands have inconsistent dimensions");
    const std::size_t steps = step_count(duration, dt);
    const Mat step = Mat::Identity(a.rows(), a.cols()) - a * dt;
    const Vec kick = b * std::sqrt(dt);
    Rng rng(seed);

    SDEPath path;
    path.seed = seed;
    path.dt = dt;
    path.times.reserve(steps + 1);
    path.states.reserve(steps + 1);
    Vec y = y0;
    path.times.push_back(0.0);
    path.states.push_back(y);
    for (std::size_t k = 0; k < steps; ++k) {
        y = step * y + kick * rng.normal();
        path.times.push_back(static_cast<double>(k + 1) * dt);
        path.states.push_back(y);
    }
    return path;
}

double relative_frobenius(const Mat& x, const Mat& ref) {
    const double denom = ref.norm();
    const double diff = (x - ref).norm();
    return denom > 0.0 ? diff / denom : diff;
}

namespace {

struct Moments {
    Vec sum;
    Mat outer;
    std::size_t count = 0;

    explicit Moments(Eigen::Index n) : sum(Vec::Zero(n)), outer(Mat::Zero(n, n)) {}

    void add(const Vec& y) {
        sum += y;
        outer.selfadjointView<Eigen::Lower>().rankUpdate(y);
        ++count;
    }
    void merge(const Moments& o) {
        sum += o.sum;
        outer += o.outer;
        count += o.count;
    }
    [[nodiscard]] Mat covariance() const {
        const auto n = sum.size();
        if (count < 2) return Mat::Zero(n, n);
        const Mat full = outer.selfadjointView<Eigen::Lower>();
        const Vec mean = sum / static_cast<double>(count);
        return (full - static_cast<double>(count) * mean * mean.transpose()) /
               static_cast<double>(count - 1);
    }
};

CovarianceReport make_report(const Moments& mom, double effective, const Mat& a, const Mat& c,
                             double sigma0) {
    CovarianceReport rep;
    rep.sigma0 = sigma0;
    rep.empirical = mom.covariance();
    const Mat forcing = sigma0 * sigma0 * c * c.transpose();
    rep.lyapunov = solve_lyapunov(a, forcing);
    rep.scaled_inverse = sigma0 * sigma0 * a.inverse();
    rep.rel_dist_lyapunov = relative_frobenius(rep.empirical, rep.lyapunov);
    rep.rel_dist_scaled_inverse = relative_frobenius(rep.empirical, rep.scaled_inverse);
    rep.samples = mom.count;
    rep.effective_samples = effective;
    rep.insufficient_samples = effective < 1e4;
    return rep;
}

}  // namespace

CovarianceReport stationary_covariance_check(const std::vector<SDEPath>& paths, const Mat& a,
                                             const Mat& c, double sigma0, double burn_in) {
    if (paths.empty()) throw std::invalid_argument("no paths supplied");
    const double rate = slowest_rate(a);
    Moments mom(a.rows());
    double recorded = 0.0;
    for (const auto& p : paths) {
        std::size_t first = p.times.size();
        for (std::size_t k = 0; k < p.times.size(); ++k) {
            if (p.times[k] >= burn_in) {
                first = k;
                break;
            }
        }
        for (std::size_t k = first; k < p.states.size(); ++k) mom.add(p.states[k]);
        if (first < p.times.size()) recorded += p.times.back() - p.times[first];
    }
    return make_report(mom, recorded * rate / 2.0, a, c, sigma0);
}

namespace {

struct OuTransition {
    Mat step;
    Mat kick;  // noise factor: kick * z with z ~ N(0, I)
};

OuTransition euler_transition(const Mat& a, const Mat& c, double sigma0, double dt) {
    guard_step(a, dt);
    return {Mat::Identity(a.rows(), a.cols()) - a * dt, sigma0 * std::sqrt(dt) * c};
}

OuTransition exact_transition(const Mat& a, const Mat& c, double sigma0, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    const SpectralDecomposition sd(a);
    const Vec& lam = sd.eigenvalues();
    const Vec b = sd.eigenvectors().transpose() * c.col(0);
    const auto n = a.rows();
    Mat m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const double s = lam[i] + lam[j];
            m(i, j) = sigma0 * sigma0 * b[i] * b[j] * -std::expm1(-s * dt) / s;
        }
    const Mat cov = sd.eigenvectors() * m * sd.eigenvectors().transpose();
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (cov + cov.transpose()));
    const Vec root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return {sd.exp_neg(dt), es.eigenvectors() * root.asDiagonal()};
}

}  // namespace

CovarianceReport simulate_stationary_covariance(const Mat& a, const Mat& c, double sigma0,
                                                const StreamingCovarianceOptions& opts) {
    if (opts.chains < 1) throw std::invalid_argument("at least one chain is required");
    if (c.rows() != a.rows() || c.cols() != 1) throw std::invalid_argument("C must be N x 1");
    const OuTransition tr = opts.scheme == OuScheme::exact ? exact_transition(a, c, sigma0, opts.dt)
                                                           : euler_transition(a, c, sigma0, opts.dt);
    const double rate = slowest_rate(a);
    const double burn_in = opts.burn_in > 0.0 ? opts.burn_in : 10.0 / rate;
    const std::size_t burn_steps = step_count(burn_in, opts.dt);
    const std::size_t record_steps = step_count(opts.duration, opts.dt);
    const auto n = a.rows();
    const auto k = tr.kick.cols();

    std::vector<Moments> per_chain(static_cast<std::size_t>(opts.chains), Moments(n));
    parallel_for(
        per_chain.size(),
        [&](std::size_t chain) {
            Rng rng(mix_seed(opts.seed, chain));
            Vec y = Vec::Zero(n);
            Vec next(n);
            Vec z(k);
            const auto advance = [&] {
                for (Eigen::Index i = 0; i < k; ++i) z[i] = rng.normal();
                next.noalias() = tr.step * y;
                next.noalias() += tr.kick * z;
                y.swap(next);
            };
            for (std::size_t s = 0; s < burn_steps; ++s) advance();
            Moments& mom = per_chain[chain];
            for (std::size_t s = 0; s < record_steps; ++s) {
                advance();
                mom.add(y);
            }
        },
        opts.threads);

    Moments total(n);
    for (const auto& m : per_chain) total.merge(m);
    const double recorded = static_cast<double>(opts.chains) * static_cast<double>(record_steps) * opts.dt;
    return make_report(total, recorded * rate / 2.0, a, c, sigma0);
}

std::string covariance_report_json(const CovarianceReport& report) {
    nlohmann::ordered_json j;
    j["sigma0"] = report.sigma0;
    j["samples"] = report.samples;
    j["effective_samples"] = report.effective_samples;
    j["insufficient_samples"] = report.insufficient_samples;
    j["dim"] = report.empirical.rows();
    j["empirical"] = row_major(report.empirical);
    j["lyapunov"] = row_major(report.lyapunov);
    j["scaled_inverse"] = row_major(report.scaled_inverse);
    j["rel_dist_lyapunov"] = report.rel_dist_lyapunov;
    j["rel_dist_scaled_inverse"] = report.rel_dist_scaled_inverse;
    return j.dump(2);
}

} // namespace resv
