#include "resv/readout.hpp"

#include "resv/errors.hpp"
#include "resv/io.hpp"
#include "resv/linalg.hpp"
#include "resv/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace resv {

FeatureBank sample_features(int d, int n, Rng& rng) {
    if (d < 1 || n < 1) throw std::invalid_argument("feature bank dimensions must be positive");
    FeatureBank bank;
    bank.alpha.resize(d, n);
    bank.beta.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) bank.alpha(i, j) = rng.uniform() - 0.5;
        bank.beta[i] = rng.uniform() - 0.5;
    }
    return bank;
}

Vec features_apply(const FeatureBank& bank, const Vec& x) {
    if (x.size() != bank.input_dim()) throw std::invalid_argument("feature input has wrong dimension");
    return (bank.alpha * x + bank.beta).array().tanh();
}

Mat features_grad(const FeatureBank& bank, const Vec& x) {
    const Vec th = features_apply(bank, x);
    const Vec sech2 = 1.0 - th.array().square();
    return sech2.asDiagonal() * bank.alpha;
}

Mat feature_matrix(const FeatureBank& bank, const Mat& states) {
    if (states.cols() != bank.input_dim()) throw std::invalid_argument("state width does not match bank");
    Mat pre = states * bank.alpha.transpose();
    pre.rowwise() += bank.beta.transpose();
    return pre.array().tanh();
}

ReadoutWeights fit_readout(const FeatureBank& bank, const Mat& states, const Vec& targets,
                           double damp) {
    const Eigen::Index l = states.rows();
    if (l == 0) throw EmptyDataError("readout training needs at least one sample");
    if (targets.size() != l) throw std::invalid_argument("targets and states differ in length");
    if (!(damp >= 0.0)) throw std::invalid_argument("damping must be non-negative");
    const double d = bank.size();

    // scaled design: rows h(x_j)^T / (D sqrt(l)); targets y_j / sqrt(l)
    const double row_scale = 1.0 / std::sqrt(static_cast<double>(l));
    Mat design = feature_matrix(bank, states) * (row_scale / d);
    Vec rhs = targets * row_scale;
    if (damp > 0.0) {
        Mat stacked(l + bank.size(), bank.size());
        stacked << design, Mat::Identity(bank.size(), bank.size()) * (damp / d);
        Vec stacked_rhs = Vec::Zero(l + bank.size());
        stacked_rhs.head(l) = rhs;
        design = std::move(stacked);
        rhs = std::move(stacked_rhs);
    }

    ReadoutWeights out;
    out.damp = damp;
    out.w = Eigen::CompleteOrthogonalDecomposition<Mat>(design).solve(rhs);
    const Vec pred = feature_matrix(bank, states) * out.w / d;
    out.residual = (targets - pred).squaredNorm() / static_cast<double>(l);
    return out;
}

double readout_predict(const FeatureBank& bank, const ReadoutWeights& weights, const Vec& x) {
    return features_apply(bank, x).dot(weights.w) / bank.size();
}

Vec ClosedLoopSystem::rhs(const Vec& x) const {
    return -reservoir.A() * x + reservoir.C().col(0) * readout_predict(bank, weights, x);
}

VectorField ClosedLoopSystem::field() const {
    return [self = *this](const Vec& x) { return self.rhs(x); };
}

Mat closed_loop_jacobian(const ClosedLoopSystem& sys, const Vec& x) {
    const Vec grad = features_grad(sys.bank, x).transpose() * sys.weights.w / sys.bank.size();
    return -sys.reservoir.A() + sys.reservoir.C().col(0) * grad.transpose();
}

Trajectory closed_loop_integrate(const ClosedLoopSystem& sys, const Vec& x0, double t0, double t1,
                                 const IntegratorConfig& cfg) {
    return integrate_field(sys.field(), x0, t0, t1, cfg);
}

// ---------------------------------------------------------------------------

CltProblem tanh_clt_problem(int n) {
    CltProblem p;
    p.h = [](const Vec& x, const Vec& theta) {
        return std::tanh(theta.head(x.size()).dot(x) + theta[x.size()]);
    };
    p.weight = [](const Vec&) { return 1.0; };
    p.sample_theta = [n](Rng& rng) {
        Vec theta(n + 1);
        for (Eigen::Index i = 0; i <= n; ++i) theta[i] = rng.uniform() - 0.5;
        return theta;
    };
    return p;
}

CltReport clt_experiment(const CltProblem& problem, const CltOptions& opts) {
    if (opts.trials < 2) throw std::invalid_argument("CLT experiment needs at least two trials");
    if (opts.d_list.empty()) throw std::invalid_argument("empty neuron-count list");
    for (int d : opts.d_list)
        if (d < 1) throw std::invalid_argument("neuron counts must be positive");

    CltReport rep;
    rep.x = opts.x;

    // reference moments, Welford
    {
        Rng rng(opts.reference_seed);
        double mean = 0.0, m2 = 0.0;
        for (std::size_t k = 0; k < opts.reference_samples; ++k) {
            const Vec theta = problem.sample_theta(rng);
            const double y = problem.weight(theta) * problem.h(opts.x, theta);
            const double delta = y - mean;
            mean += delta / static_cast<double>(k + 1);
            m2 += delta * (y - mean);
        }
        rep.u_ref = mean;
        rep.sigma2_ref = opts.reference_samples > 1 ? m2 / static_cast<double>(opts.reference_samples - 1) : 0.0;
    }

    for (std::size_t di = 0; di < opts.d_list.size(); ++di) {
        const int d = opts.d_list[di];
        std::vector<double> errors(static_cast<std::size_t>(opts.trials));
        parallel_for(
            errors.size(),
            [&](std::size_t trial) {
                Rng rng(mix_seed(mix_seed(opts.seed, di), trial));
                double acc = 0.0;
                for (int i = 0; i < d; ++i) {
                    const Vec theta = problem.sample_theta(rng);
                    acc += problem.weight(theta) * problem.h(opts.x, theta);
                }
                errors[trial] = rep.u_ref - acc / d;
            },
            opts.threads);

        double mean = 0.0;
        for (double e : errors) mean += e;
        mean /= static_cast<double>(errors.size());
        double var = 0.0;
        for (double e : errors) var += (e - mean) * (e - mean);
        var /= static_cast<double>(errors.size() - 1);
        rep.rows.push_back({d, opts.trials, var, mean, rep.sigma2_ref / d});
    }

    bool positive = true;
    for (const auto& r : rep.rows) positive = positive && r.emp_var > 0.0;
    if (!positive || rep.rows.size() < 2) {
        rep.slope = std::numeric_limits<double>::quiet_NaN();
    } else {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = static_cast<double>(rep.rows.size());
        for (const auto& r : rep.rows) {
            const double lx = std::log(static_cast<double>(r.d));
            const double ly = std::log(r.emp_var);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    return rep;
}

void write_clt_csv(std::ostream& out, const CltReport& report) {
    out << "D,trials,emp_var,ref_var\n";
    for (const auto& r : report.rows)
        out << r.d << ',' << r.trials << ',' << io::format_double(r.emp_var) << ','
            << io::format_double(r.ref_var) << '\n';
}

// ---------------------------------------------------------------------------

EigenComparison eig_compare(const Mat& closed, const Mat& source) {
    if (closed.rows() != closed.cols() || source.rows() != source.cols())
        throw std::invalid_argument("eigenvalue comparison needs square matrices");
    if (closed.rows() < source.rows())
        throw std::invalid_argument("closed-loop matrix smaller than source matrix");

    EigenComparison cmp;
    cmp.closed_eigenvalues = sorted_eigenvalues(closed);
    cmp.source_eigenvalues = sorted_eigenvalues(source);
    const Eigen::Index ns = cmp.source_eigenvalues.size();
    const Eigen::Index nc = cmp.closed_eigenvalues.size();

    std::vector<bool> source_used(ns, false), closed_used(nc, false);
    std::vector<Eigen::Index> partner(ns, -1);
    for (Eigen::Index round = 0; round < ns; ++round) {
        double best = std::numeric_limits<double>::infinity();
        Eigen::Index bi = -1, bj = -1;
        for (Eigen::Index i = 0; i < ns; ++i) {
            if (source_used[i]) continue;
            for (Eigen::Index j = 0; j < nc; ++j) {
                if (closed_used[j]) continue;
                const double dist = std::abs(cmp.source_eigenvalues[i] - cmp.closed_eigenvalues[j]);
                if (dist < best) {
                    best = dist;
                    bi = i;
                    bj = j;
                }
            }
        }
        source_used[bi] = true;
        closed_used[bj] = true;
        partner[bi] = bj;
    }
    for (Eigen::Index i = 0; i < ns; ++i) {
        const Complex s = cmp.source_eigenvalues[i];
        const Complex m = cmp.closed_eigenvalues[partner[i]];
        const double dist = std::abs(s - m);
        cmp.matches.push_back({s, m, dist});
        cmp.max_distance = std::max(cmp.max_distance, dist);
    }
    return cmp;
}

void write_eig_compare_csv(std::ostream& out, const EigenComparison& cmp) {
    out << "source_re,source_im,matched_re,matched_im,dist\n";
    for (const auto& m : cmp.matches)
        out << io::format_double(m.source.real()) << ',' << io::format_double(m.source.imag()) << ','
            << io::format_double(m.matched.real()) << ',' << io::format_double(m.matched.imag()) << ','
            << io::format_double(m.distance) << '\n';
}

} // namespace resv
